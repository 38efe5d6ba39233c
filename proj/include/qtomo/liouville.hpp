#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "qtomo/forward.hpp"

namespace qtomo {

enum class ProbePolarization { x, y };

/// Rotating-frame state of the 4-level f=1 -> F=0 system over the basis
/// {|1,-1>, |1,0>, |1,1>, |F=0,0>}.
struct FullState {
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
};

FullState embed_ground(const DensityMatrix& rho);
/// Ground 3x3 block; renormalized to unit trace when normalize is set.
DensityMatrix ground_block(const FullState& s, bool normalize = false);

/// Right-hand side of the master equation
///   d rho/dt = -i[H, rho] - 1/2 {Gamma_op, rho} + Lambda(rho)
/// with spontaneous-emission collapse channels normalized so the total
/// repopulation rate equals Gamma times the excited population, and
/// isotropic repopulation scaled by Tr(rho); both keep the trace constant.
struct LiouvilleGenerator {
  Eigen::Matrix4cd hamiltonian = Eigen::Matrix4cd::Zero();
  Eigen::Vector4d relax = Eigen::Vector4d::Zero();  // diagonal of Gamma_op
  std::array<Eigen::Matrix4cd, 3> collapse{};       // per spherical q
  double gamma_e = 0.0;
  double gamma_g = 0.0;

  Eigen::Matrix4cd apply(const Eigen::Matrix4cd& rho) const;
};

/// Throws std::invalid_argument unless (f,F) = (1,0).
LiouvilleGenerator build_generator(const TransitionSpec& spec,
                                   const ProbeConfig& probe,
                                   ProbePolarization pol);

struct IntegratorOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 = automatic
};

struct IntegrationResult {
  std::vector<double> times;
  std::vector<Eigen::Matrix4cd> states;
  long steps_accepted = 0;
  long steps_rejected = 0;
  double min_step = 0.0;
};

/// Adaptive Dormand-Prince 5(4) integration sampled at the given times
/// (which must be nondecreasing, first >= 0). Throws std::runtime_error with
/// stiffness diagnostics on step-size underflow.
IntegrationResult integrate(const LiouvilleGenerator& gen, const FullState& rho0,
                            const std::vector<double>& sample_times,
                            const IntegratorOptions& opt = {});

/// Optical signals evaluated directly from the integrated optical
/// coherences, no perturbative truncation. Requires probe.rabi > 0.
SignalTrace signal_from_integrator(const IntegrationResult& run,
                                   const TransitionSpec& spec,
                                   const ProbeConfig& probe,
                                   ProbePolarization pol = ProbePolarization::y);

/// Probe-light saturation parameter kappa_2 = Omega_R^2 / (Gamma gamma).
double saturation_kappa2(const ProbeConfig& probe);

/// Steady state of strong resonant optical pumping (probe polarization pol,
/// Larmor off), followed by a short dark period to clear the excited state.
/// Used to regenerate the aligned reference fixture.
DensityMatrix pump_steady_state(const TransitionSpec& spec, double rabi,
                                double gamma_e, double gamma_g,
                                ProbePolarization pol);

}  // namespace qtomo
