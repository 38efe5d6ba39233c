#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qtomo/reconstruct.hpp"

namespace qtomo {

enum class StateClass { pure, mixed, thermal };
std::string to_string(StateClass c);

enum class SweepAxis { snr, angle_sigma, n_measurements, kappa2 };
std::string to_string(SweepAxis a);

/// One statistical study: for each grid point and state class, run
/// n_states x n_repeats reconstructions and summarize the fidelities.
struct SweepConfig {
  SweepAxis axis = SweepAxis::snr;
  std::vector<double> grid;
  std::vector<StateClass> states = {StateClass::pure, StateClass::mixed,
                                    StateClass::thermal};
  int n_states = 10;
  int n_repeats = 20;  // desk scale; full-scale studies use 100
  double mixed_purity = 0.6;
  bool random_pulses = true;
  int n_pulses = 4;
  std::vector<PulseAngles> fixed_pulses;
  double snr = 25.0;          // used when the axis is something else
  double angle_sigma = 0.0;   // likewise
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware (capped by QTOMO_THREADS)
  MinimizeOptions minimize;
};

/// Beta-distribution summary of a fidelity histogram.
struct BetaFit {
  double a = 0.0, b = 0.0;
  double mean = 0.0, variance = 0.0;
  bool degenerate = false;  // all samples (numerically) equal
};

/// Method-of-moments estimate refined by likelihood maximization. Samples
/// are clamped into (0, 1) at 1e-9 from the boundaries; needs >= 30 samples.
BetaFit fit_beta(std::vector<double> samples);

struct SweepRow {
  double axis_value = 0.0;
  StateClass state_class = StateClass::pure;
  BetaFit beta;
  double mean_fidelity = 0.0;
  double var_fidelity = 0.0;
  int n_samples = 0;
  int n_failures = 0;
};

/// Deterministic given (config, seed); grid points, states, and repeats run
/// on a worker pool with per-task derived seeds.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg,
                                const TransitionSpec& spec,
                                const ProbeConfig& probe);

/// kappa2 axis: traces come from the master-equation integrator (probe
/// back-action included) while the inversion keeps assuming the analytic
/// model. grid values are kappa2 = rabi^2/(Gamma gamma).
std::vector<SweepRow> kappa2_sweep(const SweepConfig& cfg,
                                   const TransitionSpec& spec,
                                   const ProbeConfig& probe);

/// Worker count respecting cfg.threads and the QTOMO_THREADS env var.
int resolve_thread_count(int requested);

}  // namespace qtomo
