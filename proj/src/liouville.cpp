#include "qtomo/liouville.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qtomo/line_profile.hpp"
#include "qtomo/wigner.hpp"

namespace qtomo {

namespace {

constexpr int kGroundDim = 3;
constexpr int kExcited = 3;  // index of |F=0,0>

int pol_row(ProbePolarization pol) {
  return pol == ProbePolarization::x ? 0 : 1;
}

// (-1)^(j+I+F+1) sqrt((2f+1)(2F+1)) {j f I; F J 1}: ratio of the hyperfine
// to the fine-structure reduced dipole element.
double hyperfine_ratio(const TransitionSpec& s) {
  const int e = (s.j + s.I + s.F + HalfInt(1)).as_int();
  const double sign = e % 2 == 0 ? 1.0 : -1.0;
  return sign * std::sqrt((s.f.twice() + 1.0) * (s.F.twice() + 1.0)) *
         wigner6j(s.j, s.f, s.I, s.F, s.J, HalfInt(1));
}

// Ground-excited block of the spherical dipole component q, in units of the
// fine-structure reduced element: <f m| d_q |F mu> via Wigner-Eckart.
Eigen::Matrix<Cplx, 3, 1> dipole_q_column(const TransitionSpec& s, int q) {
  Eigen::Matrix<Cplx, 3, 1> col = Eigen::Matrix<Cplx, 3, 1>::Zero();
  const double r = hyperfine_ratio(s);
  for (int a = 0; a < kGroundDim; ++a) {
    const HalfInt m = HalfInt(a - 1);
    const HalfInt mu(0);
    const double w = wigner3j(s.f, HalfInt(1), s.F, -m, HalfInt(q), mu);
    const int ph = (s.f - m).as_int();
    col(a) = (ph % 2 == 0 ? 1.0 : -1.0) * w * r;
  }
  return col;
}

}  // namespace

FullState embed_ground(const DensityMatrix& rho) {
  if (rho.dim() != kGroundDim)
    throw std::invalid_argument("embed_ground: need a 3x3 ground state");
  FullState s;
  s.rho.topLeftCorner<3, 3>() = rho.mat;
  return s;
}

DensityMatrix ground_block(const FullState& s, bool normalize) {
  Eigen::MatrixXcd g = s.rho.topLeftCorner<3, 3>();
  if (normalize) {
    const double tr = g.trace().real();
    if (tr > 0) g /= tr;
  }
  return DensityMatrix(g);
}

Eigen::Matrix4cd LiouvilleGenerator::apply(const Eigen::Matrix4cd& rho) const {
  const Cplx iu(0.0, 1.0);
  Eigen::Matrix4cd out = -iu * (hamiltonian * rho - rho * hamiltonian);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) out(a, b) -= 0.5 * (relax(a) + relax(b)) * rho(a, b);
  for (const auto& c : collapse) out += gamma_e * (c * rho * c.adjoint());
  const double trace = rho.trace().real();
  for (int a = 0; a < kGroundDim; ++a)
    out(a, a) += gamma_g * trace / kGroundDim;
  return out;
}

LiouvilleGenerator build_generator(const TransitionSpec& spec,
                                   const ProbeConfig& probe,
                                   ProbePolarization pol) {
  if (spec.f != HalfInt(1) || spec.F != HalfInt(0))
    throw std::invalid_argument("build_generator: only f=1 -> F=0 is supported");

  LiouvilleGenerator gen;
  gen.gamma_e = probe.gamma_e;
  gen.gamma_g = probe.gamma_g;

  // H0 + magnetic part. F_z on the excited F=0 level vanishes, so the
  // beta_ratio term drops out for this transition.
  Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
  h(kExcited, kExcited) = probe.detuning;
  for (int a = 0; a < kGroundDim; ++a) h(a, a) += probe.larmor * (a - 1);

  // Optical coupling -(Omega_R/2)(P_g d_pol P_e + h.c.) with d_pol assembled
  // from spherical components through the same U as the detection side.
  const Eigen::Matrix3cd u = spherical_to_cartesian();
  Eigen::Matrix<Cplx, 3, 1> dpol = Eigen::Matrix<Cplx, 3, 1>::Zero();
  for (int qi = 0; qi < 3; ++qi)
    dpol += u(pol_row(pol), qi) * dipole_q_column(spec, qi - 1);
  for (int a = 0; a < kGroundDim; ++a) {
    h(a, kExcited) += -probe.rabi / 2.0 * dpol(a);
    h(kExcited, a) += -probe.rabi / 2.0 * std::conj(dpol(a));
  }
  gen.hamiltonian = h;

  gen.relax = Eigen::Vector4d::Constant(probe.gamma_g);
  gen.relax(kExcited) += probe.gamma_e;

  // Spontaneous-emission channels, branching from 3j coefficients and
  // normalized so sum_q A_q^dag A_q = P_e.
  for (int qi = 0; qi < 3; ++qi) {
    Eigen::Matrix4cd a = Eigen::Matrix4cd::Zero();
    const HalfInt q(qi - 1);
    for (int ai = 0; ai < kGroundDim; ++ai) {
      const HalfInt m = HalfInt(ai - 1);
      if (m != q) continue;  // mu = m - q must be 0 for F=0
      const double w = wigner3j(spec.f, HalfInt(1), spec.F, -m, q, HalfInt(0));
      const int ph = (spec.f - m).as_int();
      a(ai, kExcited) = std::sqrt(double(spec.F.twice() + 1)) *
                        (ph % 2 == 0 ? 1.0 : -1.0) * w;
    }
    gen.collapse[qi] = a;
  }
  return gen;
}

IntegrationResult integrate(const LiouvilleGenerator& gen, const FullState& rho0,
                            const std::vector<double>& sample_times,
                            const IntegratorOptions& opt) {
  if (sample_times.empty())
    throw std::invalid_argument("integrate: no sample times");
  for (size_t k = 0; k + 1 < sample_times.size(); ++k)
    if (sample_times[k] > sample_times[k + 1])
      throw std::invalid_argument("integrate: sample times must be nondecreasing");
  if (sample_times.front() < 0.0)
    throw std::invalid_argument("integrate: negative start time");

  using M = Eigen::Matrix4cd;

  // Dormand-Prince 5(4) tableau.
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  IntegrationResult res;
  res.times = sample_times;
  res.states.reserve(sample_times.size());

  const double t_end = sample_times.back();
  double t = 0.0;
  M y = rho0.rho;
  M k1 = gen.apply(y);

  auto err_norm = [&](const M& e, const M& ya, const M& yb) {
    double maxr = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double sc = opt.atol + opt.rtol * std::max(std::abs(ya(i, j)),
                                                         std::abs(yb(i, j)));
        const double r = std::abs(e(i, j)) / sc;
        if (!std::isfinite(r)) return std::numeric_limits<double>::infinity();
        maxr = std::max(maxr, r);
      }
    return maxr;
  };

  double h = opt.initial_step;
  if (h <= 0.0) {
    const double scale = gen.hamiltonian.cwiseAbs().maxCoeff() +
                         gen.relax.cwiseAbs().maxCoeff() + 1.0;
    h = 0.01 / scale;
    if (!std::isfinite(h)) h = 1e-6;
  }
  res.min_step = h;
  const double h_floor = std::max(t_end, 1.0) * 1e-15;

  const double t_tol = 1e-12 * std::max(1.0, t_end);
  size_t next_sample = 0;
  while (next_sample < sample_times.size() &&
         sample_times[next_sample] <= t + t_tol) {
    res.states.push_back(y);
    ++next_sample;
  }

  while (next_sample < sample_times.size()) {
    bool hit_sample = false;
    double h_try = h;
    if (t + h_try >= sample_times[next_sample]) {
      h_try = sample_times[next_sample] - t;
      hit_sample = true;
    }

    const M k2 = gen.apply(y + h_try * (a21 * k1));
    const M k3 = gen.apply(y + h_try * (a31 * k1 + a32 * k2));
    const M k4 = gen.apply(y + h_try * (a41 * k1 + a42 * k2 + a43 * k3));
    const M k5 = gen.apply(y + h_try * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const M k6 = gen.apply(
        y + h_try * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const M ynew =
        y + h_try * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const M k7 = gen.apply(ynew);
    const M errm =
        h_try * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double err = err_norm(errm, y, ynew);
    if (err <= 1.0) {
      t += h_try;
      y = ynew;
      k1 = k7;  // FSAL
      ++res.steps_accepted;
      res.min_step = std::min(res.min_step, h_try);
      while (next_sample < sample_times.size() &&
             sample_times[next_sample] <= t + t_tol) {
        res.states.push_back(y);
        ++next_sample;
      }
    } else {
      ++res.steps_rejected;
    }

    double fac = 0.2;  // hard shrink when the error estimate is not finite
    if (std::isfinite(err))
      fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    if (!hit_sample || err > 1.0 || !std::isfinite(err)) h = h_try * fac;
    else h = std::max(h, h_try * fac);

    if (!std::isfinite(h) || h < h_floor) {
      std::ostringstream msg;
      msg << "integrate: step size underflow at t=" << t << " (h=" << h
          << ", accepted=" << res.steps_accepted
          << ", rejected=" << res.steps_rejected
          << "); the generator appears too stiff for the explicit scheme";
      throw std::runtime_error(msg.str());
    }
  }
  return res;
}

SignalTrace signal_from_integrator(const IntegrationResult& run,
                                   const TransitionSpec& spec,
                                   const ProbeConfig& probe,
                                   ProbePolarization pol) {
  if (probe.rabi <= 0.0)
    throw std::invalid_argument("signal_from_integrator: rabi must be positive");

  // Prefactor relating sum_q U_xq B_q(t) built on optical coherences to the
  // same chi * L scale used by the analytic model (the reduced dipole and
  // field amplitude combine into chi / Omega_R).
  const double r = hyperfine_ratio(spec);
  const int p2 = (spec.j.twice() + spec.J.twice()) % 2 == 0 ? 1 : -1;
  const int pg = (spec.f.twice()) % 2 == 0 ? 1 : -1;  // (-1)^f folds G into r
  const double kpref = 2.0 * chi_length(spec) / probe.rabi * pg * p2 *
                       r /
                       ((spec.f.twice() + 1.0) * (spec.F.twice() + 1.0) *
                        wigner6j(spec.j, spec.f, spec.I, spec.F, spec.J, HalfInt(1)) *
                        wigner6j(spec.j, spec.f, spec.I, spec.F, spec.J, HalfInt(1)));

  const Eigen::Matrix3cd u = spherical_to_cartesian();
  const int det_row = pol == ProbePolarization::y ? 0 : 1;  // orthogonal axis

  SignalTrace trace;
  trace.times = run.times;
  trace.meta.spec = spec;
  trace.meta.probe = probe;
  trace.delta_alpha.resize(run.times.size());
  trace.delta_epsilon.resize(run.times.size());
  trace.delta_absorption.resize(run.times.size());
  trace.delta_phase.resize(run.times.size());

  for (size_t k = 0; k < run.states.size(); ++k) {
    const Eigen::Matrix4cd& rho = run.states[k];
    Cplx sum_det = 0.0, sum_par = 0.0;
    for (int qi = 0; qi < 3; ++qi) {
      const HalfInt q(qi - 1);
      Cplx bq = 0.0;
      for (int ai = 0; ai < kGroundDim; ++ai) {
        const HalfInt m = HalfInt(ai - 1);
        const double w =
            wigner3j(spec.f, HalfInt(1), spec.F, -m, q, HalfInt(0));
        if (w == 0.0) continue;
        const int ph = m.as_int() % 2 == 0 ? 1 : -1;  // (-1)^m
        bq += double(ph) * w * rho(kExcited, ai);     // rho_{mu m}
      }
      sum_det += u(det_row, qi) * bq;
      sum_par += u(pol_row(pol), qi) * bq;
    }
    // Delta_epsilon - i Delta_alpha = -K sum_q U_{perp q} B_q for the
    // y-polarized probe; the orthogonal-quadrature projection changes sign
    // when the polarization axis is x (pinned by the frame-rotation
    // equivalence test).
    const double det_sign = pol == ProbePolarization::y ? -1.0 : 1.0;
    const Cplx s = det_sign * kpref * sum_det;
    trace.delta_epsilon[k] = s.real();
    trace.delta_alpha[k] = -s.imag();
    // Delta_phi - i Delta_E/E = +K sum_q U_{par q} B_q
    const Cplx w = kpref * sum_par;
    trace.delta_phase[k] = w.real();
    trace.delta_absorption[k] = -w.imag();
  }
  return trace;
}

double saturation_kappa2(const ProbeConfig& probe) {
  if (probe.gamma_g <= 0.0 || probe.gamma_e <= 0.0)
    throw std::invalid_argument("saturation_kappa2: rates must be positive");
  return probe.rabi * probe.rabi / (probe.gamma_e * probe.gamma_g);
}

DensityMatrix pump_steady_state(const TransitionSpec& spec, double rabi,
                                double gamma_e, double gamma_g,
                                ProbePolarization pol) {
  ProbeConfig pump;
  pump.detuning = 0.0;
  pump.rabi = rabi;
  pump.gamma_e = gamma_e;
  pump.gamma_g = gamma_g;
  pump.larmor = 0.0;
  const LiouvilleGenerator gen = build_generator(spec, pump, pol);
  const FullState init = embed_ground(DensityMatrix::maximally_mixed(3));
  const double t_pump = 40.0 / gamma_g;
  IntegrationResult run = integrate(gen, init, {t_pump}, {1e-10, 1e-14, 0.0});

  // Dark period: drop the light, let the excited state decay away.
  ProbeConfig dark = pump;
  dark.rabi = 0.0;
  const LiouvilleGenerator gend = build_generator(spec, dark, pol);
  FullState mid;
  mid.rho = run.states.back();
  IntegrationResult rund =
      integrate(gend, mid, {20.0 / gamma_e}, {1e-10, 1e-14, 0.0});
  FullState fin;
  fin.rho = rund.states.back();
  return ground_block(fin, true);
}

}  // namespace qtomo
