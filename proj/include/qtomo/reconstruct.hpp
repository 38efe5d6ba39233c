#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "qtomo/density_matrix.hpp"
#include "qtomo/measure.hpp"

namespace qtomo {

/// The three rotated-frame quantities a single fitted trace determines:
/// the Delta-m = 2 coherence <1|rho|-1> of the post-pulse state and the
/// population difference rho_{-1,-1} - rho_{1,1}, tagged with the pulse the
/// inversion assumed.
struct PartialMeasurement {
  PulseAngles pulse;
  std::complex<double> rho_1m1{0.0, 0.0};
  double pop_diff = 0.0;
  std::optional<Eigen::Vector3d> weights;  // inverse-variance (ReC, ImC, pop)
};

/// Linear scales mapping post-pulse matrix elements to fit amplitudes,
/// derived from the forward model itself by evaluating its amplitudes on
/// unit Hermitian inputs (no hand-copied constants).
struct InversionScales {
  double coh = 0.0;  // A = coh * Re rho_1m1, B = -coh * Im rho_1m1
  double pop = 0.0;  // C = pop * (rho_{-1,-1} - rho_{1,1})
};
InversionScales derive_inversion_scales(const TransitionSpec& spec,
                                        const ProbeConfig& probe);

/// Invert a fit into rotated-frame matrix elements (nominal pulse recorded).
/// Throws std::domain_error when the population channel is unobservable
/// (imaginary line-profile part below threshold, i.e. detuning ~ 0).
PartialMeasurement invert_fit(const FitResult& fit, const PulseAngles& nominal,
                              const TransitionSpec& spec,
                              const ProbeConfig& probe,
                              bool attach_weights = false);

/// Masked Frobenius objective: for each measurement, compare only the three
/// measured real degrees of freedom of Q rho Q^dag against the measurement.
double objective_value(const std::vector<PartialMeasurement>& measurements,
                       const DensityMatrix& rho);

struct MinimizeOptions {
  int restarts = 8;          // random starts beside the maximally mixed one
  int max_iterations = 400;  // per start
  double tolerance = 1e-10;  // objective decrease
  std::uint64_t seed = 1;
  bool use_weights = false;
};

struct ReconstructionResult {
  DensityMatrix rho;
  double distance = 0.0;  // objective at the optimum
  int iterations = 0;
  bool converged = false;
  bool rank_deficient = false;
  double fidelity_vs_truth = -1.0;  // filled by reconstruct() when truth known
};

/// Quasi-Newton (BFGS) descent over Cholesky parameters with multi-start;
/// equal-objective ties resolved toward lower purity.
ReconstructionResult minimize(const std::vector<PartialMeasurement>& measurements,
                              const MinimizeOptions& options = {});

/// Rank of the linearized measurement map on traceless Hermitian matrices
/// (8 means a full reconstruction is determined).
int measurement_rank(const std::vector<PulseAngles>& pulses);

struct PipelineOptions {
  double snr = 0.0;          // 0 or +inf = noiseless
  double angle_sigma = 0.0;  // Gaussian perturbation of executed pulse angles
  std::uint64_t seed = 1;
  MinimizeOptions minimize;
  std::vector<double> time_grid;  // empty = default grid
};

/// End-to-end: simulate -> noise -> fit -> invert -> minimize. Executed
/// pulses are perturbed by angle_sigma while the inversion assumes the
/// nominal angles.
ReconstructionResult reconstruct(const DensityMatrix& rho_true,
                                 const std::vector<PulseAngles>& pulses,
                                 const TransitionSpec& spec,
                                 const ProbeConfig& probe,
                                 const PipelineOptions& options = {});

/// Reconstruction from already-measured traces (the CLI path).
ReconstructionResult reconstruct_from_traces(
    const std::vector<SignalTrace>& traces, const TransitionSpec& spec,
    const ProbeConfig& probe, const MinimizeOptions& options = {});

}  // namespace qtomo
