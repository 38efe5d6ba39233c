#include "qtomo/forward.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qtomo/line_profile.hpp"
#include "qtomo/wigner.hpp"

namespace qtomo {

namespace {

constexpr double kEps0 = 8.8541878128e-12;   // F/m
constexpr double kSpeedOfLight = 299792458.0;  // m/s
constexpr double kHbar = 1.054571817e-34;      // J s

int parity_2j2J(const TransitionSpec& s) {
  return (s.j.twice() + s.J.twice()) % 2 == 0 ? 1 : -1;
}

double hyperfine_sixj(const TransitionSpec& s) {
  return wigner6j(s.j, s.f, s.I, s.F, s.J, HalfInt(1));
}

}  // namespace

ModelValidity check_validity(const ProbeConfig& probe) {
  ModelValidity v;
  const double ad = std::abs(probe.detuning);
  v.larmor_exceeds_detuning = probe.larmor >= ad;
  v.gamma_exceeds_excited = probe.gamma_g >= probe.gamma_e;
  v.larmor_not_small = probe.larmor > 0.1 * ad;
  v.detuning_within_linewidth = ad < probe.gamma_e;
  return v;
}

double chi(const TransitionSpec& spec) {
  const double sj = hyperfine_sixj(spec);
  return spec.number_density * spec.omega * spec.reduced_dipole *
         spec.reduced_dipole / (2.0 * kEps0 * kSpeedOfLight * kHbar) *
         parity_2j2J(spec) * (spec.f.twice() + 1.0) * (spec.F.twice() + 1.0) *
         sj * sj;
}

double chi_length(const TransitionSpec& spec) {
  return chi(spec) * spec.cell_length;
}

TransitionSpec reference_qutrit() {
  TransitionSpec s;
  s.f = HalfInt(1);
  s.F = HalfInt(0);
  s.j = halves(1);
  s.J = halves(3);
  s.I = halves(3);
  s.number_density = 1e10;
  s.cell_length = 1.0;
  s.omega = 1.0;
  const double sj = hyperfine_sixj(s);
  // Pick the dipole so chi * L = 1 exactly (parity is +1 here).
  s.reduced_dipole =
      std::sqrt(2.0 * kEps0 * kSpeedOfLight * kHbar /
                (s.number_density * s.omega * s.cell_length * 3.0 * sj * sj));
  return s;
}

std::vector<double> default_time_grid(const ProbeConfig& probe) {
  if (probe.larmor <= 0.0)
    throw std::invalid_argument("default_time_grid: larmor must be positive");
  const int periods = 8, per_period = 64;
  const double dt = 2.0 * std::numbers::pi / probe.larmor / per_period;
  std::vector<double> t(periods * per_period);
  for (size_t k = 0; k < t.size(); ++k) t[k] = k * dt;
  return t;
}

DensityMatrix evolve_ground(const DensityMatrix& rho0, double t, double gamma,
                            double larmor) {
  if (t < 0.0) throw std::invalid_argument("evolve_ground: t < 0");
  const int dim = rho0.dim();
  const double decay = std::exp(-gamma * t);
  Eigen::MatrixXcd out(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      if (a == b) {
        out(a, a) = (rho0.mat(a, a) - 1.0 / dim) * decay + 1.0 / dim;
      } else {
        const int n_minus_m = a - b;  // index spacing equals m spacing
        out(a, b) = rho0.mat(a, b) * decay *
                    std::exp(Cplx(0.0, -n_minus_m * larmor * t));
      }
    }
  return DensityMatrix(out);
}

RotationAmplitudes rotation_amplitudes(const Eigen::MatrixXcd& rho_rotated,
                                       const TransitionSpec& spec,
                                       const ProbeConfig& probe) {
  const ObservableSet obs = build_observables(spec.f, spec.F);
  const Cplx v = voigt(probe.detuning, probe.gamma_e, probe.doppler);
  const double cl = chi_length(spec);
  const double ar = (rho_rotated * obs.alpha_r).trace().real();
  const double ai = (rho_rotated * obs.alpha_i).trace().real();
  const double be = (rho_rotated * obs.beta).trace().real();
  // Overall sign fixed against the master-equation integrator; see
  // test_liouville.
  RotationAmplitudes amp;
  amp.a_sin = -cl * v.real() * ar;
  amp.b_cos = -cl * v.real() * ai;
  amp.c_flat = cl * v.imag() * be;
  return amp;
}

SignalTrace signal(const DensityMatrix& rho0, const PulseAngles& pulse,
                   const TransitionSpec& spec, const ProbeConfig& probe,
                   const std::vector<double>& times, SignalChannels channels) {
  for (size_t k = 0; k + 1 < times.size(); ++k)
    if (!(times[k] < times[k + 1]))
      throw std::invalid_argument("signal: times must be strictly increasing");
  if (!times.empty() && times.front() < 0.0)
    throw std::invalid_argument("signal: negative time");

  const DensityMatrix rot = rotate_state(rho0, pulse);
  const ObservableSet obs = build_observables(spec.f, spec.F);
  const Cplx v = voigt(probe.detuning, probe.gamma_e, probe.doppler);
  const double cl = chi_length(spec);
  const double ar = expectation_real(obs.alpha_r, rot);
  const double ai = expectation_real(obs.alpha_i, rot);
  const double be = expectation_real(obs.beta, rot);
  const double de = expectation_real(obs.delta, rot);

  SignalTrace trace;
  trace.times = times;
  trace.meta.spec = spec;
  trace.meta.probe = probe;
  trace.meta.pulse = pulse;
  trace.delta_alpha.resize(times.size());
  if (channels.ellipticity) trace.delta_epsilon.resize(times.size());
  if (channels.absorption) trace.delta_absorption.resize(times.size());
  if (channels.phase) trace.delta_phase.resize(times.size());

  const double w2 = 2.0 * probe.larmor;
  for (size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    const double env = std::exp(-probe.gamma_g * t);
    const double sn = std::sin(w2 * t), cs = std::cos(w2 * t);
    trace.delta_alpha[k] =
        -cl * env * (ar * v.real() * sn + ai * v.real() * cs - be * v.imag());
    if (channels.ellipticity)
      trace.delta_epsilon[k] =
          cl * env * (ar * v.imag() * sn + ai * v.imag() * cs + be * v.real());
    const double aniso = env * (ar * cs - ai * sn + (de - obs.delta_s));
    if (channels.absorption)
      trace.delta_absorption[k] = cl * v.real() * (aniso + obs.delta_s);
    if (channels.phase)
      trace.delta_phase[k] = -cl * v.imag() * (aniso + obs.delta_s);
  }
  return trace;
}

std::pair<std::vector<double>, std::vector<double>> absorption_phase(
    const DensityMatrix& rho0, const PulseAngles& pulse,
    const TransitionSpec& spec, const ProbeConfig& probe,
    const std::vector<double>& times) {
  SignalChannels ch;
  ch.absorption = ch.phase = true;
  SignalTrace tr = signal(rho0, pulse, spec, probe, times, ch);
  return {std::move(tr.delta_absorption), std::move(tr.delta_phase)};
}

}  // namespace qtomo
