#pragma once

#include <cstdint>
#include <vector>

#include "qtomo/density_matrix.hpp"
#include "qtomo/half_int.hpp"
#include "qtomo/observables.hpp"

namespace qtomo {

/// Atomic constants of the probed transition, SI units.
struct TransitionSpec {
  HalfInt f, F;      // ground / excited total angular momentum
  HalfInt j, J, I;   // electronic angular momenta and nuclear spin
  double reduced_dipole = 0.0;   // <j||d||J>, C m
  double number_density = 0.0;   // m^-3
  double cell_length = 0.0;      // m
  double omega = 0.0;            // light angular frequency, rad/s
};

/// Probe and environment parameters. All rates share one unit system; the
/// bundled studies use Larmor-normalized units (larmor = 1).
struct ProbeConfig {
  double detuning = 0.0;     // Delta
  double rabi = 0.0;         // Omega_R
  double gamma_e = 1.0;      // excited-state relaxation Gamma
  double gamma_g = 0.0;      // ground-state relaxation gamma
  double larmor = 1.0;       // Omega_L
  double doppler = 0.0;      // Gamma_D, 0 = no Doppler averaging
  double beta_ratio = 0.0;   // g_F / g_f, used only by the integrator
};

/// Flags for the regime assumptions behind the analytic model.
struct ModelValidity {
  bool larmor_exceeds_detuning = false;   // hard: Omega_L >= |Delta|
  bool gamma_exceeds_excited = false;     // hard: gamma >= Gamma
  bool larmor_not_small = false;          // soft: Omega_L > |Delta|/10
  bool detuning_within_linewidth = false; // soft, informational
  bool hard_violation() const {
    return larmor_exceeds_detuning || gamma_exceeds_excited;
  }
};
ModelValidity check_validity(const ProbeConfig& probe);

/// Coupling constant chi in rad/(s m): scales all optical signals.
/// Forbidden transitions give 0 through the vanishing 6j symbol.
double chi(const TransitionSpec& spec);

/// chi * L, the dimensionless overall signal scale.
double chi_length(const TransitionSpec& spec);

/// f=1 -> F=0 test transition (87Rb D2 quantum numbers) with the reduced
/// dipole chosen so that chi * L = 1 in the Larmor-normalized unit system.
TransitionSpec reference_qutrit();

struct TraceMeta {
  TransitionSpec spec;
  ProbeConfig probe;
  PulseAngles pulse;
  std::uint64_t seed = 0;  // noise seed, 0 when noiseless
  double snr = 0.0;        // 0 when noiseless
};

/// Time series of optical signals. delta_alpha is always present; the other
/// channels are filled only when requested.
struct SignalTrace {
  std::vector<double> times;
  std::vector<double> delta_alpha;
  std::vector<double> delta_epsilon;
  std::vector<double> delta_absorption;  // Delta E / E
  std::vector<double> delta_phase;
  TraceMeta meta;
};

struct SignalChannels {
  bool ellipticity = false;
  bool absorption = false;
  bool phase = false;
  static SignalChannels all() { return {true, true, true}; }
};

/// 8 Larmor periods at 64 samples per period.
std::vector<double> default_time_grid(const ProbeConfig& probe);

/// Free ground-state evolution: populations decay toward 1/(2f+1) at rate
/// gamma, coherences pick up exp(-gamma t) exp(-i (n-m) Omega_L t).
DensityMatrix evolve_ground(const DensityMatrix& rho0, double t, double gamma,
                            double larmor);

/// Envelope amplitudes of the rotation signal
///   delta_alpha(t) = exp(-gamma t) [A sin(2 W t) + B cos(2 W t) + C].
/// Linear in the (already pulse-rotated) input matrix, which therefore does
/// not need to be a physical state; that linearity is what the inversion
/// calibration in reconstruct relies on.
struct RotationAmplitudes {
  double a_sin = 0.0, b_cos = 0.0, c_flat = 0.0;
};
RotationAmplitudes rotation_amplitudes(const Eigen::MatrixXcd& rho_rotated,
                                       const TransitionSpec& spec,
                                       const ProbeConfig& probe);

/// Closed-form polarization-rotation trace (plus optional channels) for the
/// state rho0 after applying the control pulse at t = 0.
SignalTrace signal(const DensityMatrix& rho0, const PulseAngles& pulse,
                   const TransitionSpec& spec, const ProbeConfig& probe,
                   const std::vector<double>& times,
                   SignalChannels channels = {});

/// Relative absorption and phase-change traces.
std::pair<std::vector<double>, std::vector<double>> absorption_phase(
    const DensityMatrix& rho0, const PulseAngles& pulse,
    const TransitionSpec& spec, const ProbeConfig& probe,
    const std::vector<double>& times);

}  // namespace qtomo
