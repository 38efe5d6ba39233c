#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "qtomo/forward.hpp"

namespace qtomo {

/// White-noise description per the SNR convention: sigma equals the
/// fully-aligned reference signal amplitude divided by snr.
struct NoiseSpec {
  double snr = 0.0;
  std::uint64_t seed = 0;
  double reference_amplitude = 0.0;
};

/// Peak |delta_alpha| of the aligned reference state under the same
/// spec/probe and an identity pulse on the default grid; normalizes SNR.
double reference_amplitude(const TransitionSpec& spec, const ProbeConfig& probe);

/// Adds i.i.d. Gaussian samples with sigma = reference_amplitude/snr to the
/// rotation channel only; seed and snr recorded in the trace meta.
SignalTrace add_noise(const SignalTrace& trace, const NoiseSpec& noise);

struct FitResult {
  double A = 0.0, B = 0.0, C = 0.0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  double residual_rms = 0.0;
};

/// Linear least squares in the basis
///   { e^(-gamma t) sin(2 W t), e^(-gamma t) cos(2 W t), e^(-gamma t) }
/// with W and gamma known. Covariance from the residual variance.
/// Throws std::runtime_error on a singular design (degenerate grid).
FitResult fit_envelope(const SignalTrace& trace, double larmor, double gamma);

/// Optional nonlinear refinement of (larmor, gamma) wrapped around the
/// linear solve; off the main reconstruction path.
struct RefinedFit {
  FitResult fit;
  double larmor = 0.0, gamma = 0.0;
  int iterations = 0;
};
RefinedFit fit_envelope_refined(const SignalTrace& trace, double larmor0,
                                double gamma0, int max_iters = 40);

}  // namespace qtomo
