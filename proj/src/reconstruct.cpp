#include "qtomo/reconstruct.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "qtomo/line_profile.hpp"
#include "qtomo/wigner.hpp"

namespace qtomo {

namespace {

// Post-pulse rotation operator for f=1.
Eigen::Matrix3cd pulse_operator(const PulseAngles& p) {
  return rotation_operator(HalfInt(1), p.phi, p.theta);
}

struct MeasuredDofs {
  std::complex<double> coherence;  // <1|r|-1> of Q rho Q^dag
  double pop_diff;                 // r_{-1,-1} - r_{1,1}
};

MeasuredDofs measured_dofs(const Eigen::Matrix3cd& rho_rot) {
  return {rho_rot(2, 0), rho_rot(0, 0).real() - rho_rot(2, 2).real()};
}

}  // namespace

InversionScales derive_inversion_scales(const TransitionSpec& spec,
                                        const ProbeConfig& probe) {
  // The rotation amplitudes are linear in the state, so unit Hermitian
  // (non-physical) inputs read off the scales directly.
  Eigen::MatrixXcd h_re = Eigen::MatrixXcd::Zero(3, 3);
  h_re(2, 0) = 1.0;
  h_re(0, 2) = 1.0;  // Re <1|rho|-1> = 1
  Eigen::MatrixXcd h_pop = Eigen::MatrixXcd::Zero(3, 3);
  h_pop(0, 0) = 0.5;
  h_pop(2, 2) = -0.5;  // pop_diff = 1

  InversionScales s;
  s.coh = rotation_amplitudes(h_re, spec, probe).a_sin;
  s.pop = rotation_amplitudes(h_pop, spec, probe).c_flat;
  return s;
}

PartialMeasurement invert_fit(const FitResult& fit, const PulseAngles& nominal,
                              const TransitionSpec& spec,
                              const ProbeConfig& probe, bool attach_weights) {
  const InversionScales s = derive_inversion_scales(spec, probe);
  const double vi_threshold =
      1e-9 * std::abs(voigt(0.0, probe.gamma_e, probe.doppler).real());
  if (std::abs(s.pop) <
      vi_threshold * std::abs(chi_length(spec)) / 3.0)
    throw std::domain_error(
        "invert_fit: population channel dead (detuning too close to resonance)");
  if (s.coh == 0.0)
    throw std::domain_error("invert_fit: coherence channel scale vanished");

  PartialMeasurement m;
  m.pulse = nominal;
  m.rho_1m1 = std::complex<double>(fit.A / s.coh, -fit.B / s.coh);
  m.pop_diff = fit.C / s.pop;
  if (attach_weights) {
    Eigen::Vector3d var;
    var << fit.covariance(0, 0) / (s.coh * s.coh),
        fit.covariance(1, 1) / (s.coh * s.coh),
        fit.covariance(2, 2) / (s.pop * s.pop);
    m.weights = var.cwiseMax(1e-300).cwiseInverse();
  }
  return m;
}

double objective_value(const std::vector<PartialMeasurement>& measurements,
                       const DensityMatrix& rho) {
  if (measurements.empty())
    throw std::invalid_argument("objective_value: no measurements");
  double total = 0.0;
  for (const auto& meas : measurements) {
    const Eigen::Matrix3cd q = pulse_operator(meas.pulse);
    const Eigen::Matrix3cd rot = q * rho.mat * q.adjoint();
    const MeasuredDofs d = measured_dofs(rot);
    const double dre = d.coherence.real() - meas.rho_1m1.real();
    const double dim = d.coherence.imag() - meas.rho_1m1.imag();
    const double dpp = d.pop_diff - meas.pop_diff;
    if (meas.weights) {
      const Eigen::Vector3d& w = *meas.weights;
      total += w(0) * dre * dre + w(1) * dim * dim + w(2) * dpp * dpp;
    } else {
      total += dre * dre + dim * dim + dpp * dpp;
    }
  }
  return total;
}

int measurement_rank(const std::vector<PulseAngles>& pulses) {
  // Basis of traceless Hermitian 3x3 matrices (Gell-Mann style).
  std::vector<Eigen::Matrix3cd> basis;
  const Cplx iu(0, 1);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      Eigen::Matrix3cd s = Eigen::Matrix3cd::Zero();
      s(a, b) = 1;
      s(b, a) = 1;
      basis.push_back(s);
      Eigen::Matrix3cd t = Eigen::Matrix3cd::Zero();
      t(a, b) = -iu;
      t(b, a) = iu;
      basis.push_back(t);
    }
  Eigen::Matrix3cd d1 = Eigen::Matrix3cd::Zero();
  d1.diagonal() << 1, -1, 0;
  basis.push_back(d1);
  Eigen::Matrix3cd d2 = Eigen::Matrix3cd::Zero();
  d2.diagonal() << 1, 1, -2;
  basis.push_back(d2 / std::sqrt(3.0));

  Eigen::MatrixXd map(3 * pulses.size(), basis.size());
  for (size_t p = 0; p < pulses.size(); ++p) {
    const Eigen::Matrix3cd q = pulse_operator(pulses[p]);
    for (size_t c = 0; c < basis.size(); ++c) {
      const Eigen::Matrix3cd rot = q * basis[c] * q.adjoint();
      const MeasuredDofs d = measured_dofs(rot);
      map(3 * p + 0, c) = d.coherence.real();
      map(3 * p + 1, c) = d.coherence.imag();
      map(3 * p + 2, c) = d.pop_diff;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(map);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * sv(0)) ++rank;
  return rank;
}

namespace {

// BFGS with backtracking line search over the 9 Cholesky parameters. A weak
// gauge penalty pins the scale of T (the objective is invariant under
// T -> cT) without moving the optimum in state space.
class CholeskyObjective {
 public:
  explicit CholeskyObjective(const std::vector<PartialMeasurement>& meas)
      : meas_(meas) {}

  double operator()(const Eigen::VectorXd& x) const {
    CholeskyParams p{std::vector<double>(x.data(), x.data() + x.size()), 3};
    const double raw = objective_value(meas_, to_density(p));
    const double norm2 = x.squaredNorm();
    const double gauge = norm2 - 1.0;
    return raw + 1e-6 * gauge * gauge;
  }

  double raw(const Eigen::VectorXd& x) const {
    CholeskyParams p{std::vector<double>(x.data(), x.data() + x.size()), 3};
    return objective_value(meas_, to_density(p));
  }

  // Residual vector (3 per measurement plus the gauge term); the objective
  // above is its squared norm.
  Eigen::VectorXd residuals(const Eigen::VectorXd& x) const {
    CholeskyParams p{std::vector<double>(x.data(), x.data() + x.size()), 3};
    const DensityMatrix rho = to_density(p);
    Eigen::VectorXd r(3 * meas_.size() + 1);
    size_t k = 0;
    for (const auto& meas : meas_) {
      const Eigen::Matrix3cd q = pulse_operator(meas.pulse);
      const Eigen::Matrix3cd rot = q * rho.mat * q.adjoint();
      const MeasuredDofs d = measured_dofs(rot);
      Eigen::Vector3d w = Eigen::Vector3d::Ones();
      if (meas.weights) w = meas.weights->cwiseSqrt();
      r(k++) = w(0) * (d.coherence.real() - meas.rho_1m1.real());
      r(k++) = w(1) * (d.coherence.imag() - meas.rho_1m1.imag());
      r(k++) = w(2) * (d.pop_diff - meas.pop_diff);
    }
    r(k) = 1e-3 * (x.squaredNorm() - 1.0);
    return r;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g(x.size());
    for (int i = 0; i < x.size(); ++i) {
      const double h = 1e-7 * std::max(1.0, std::abs(x(i)));
      Eigen::VectorXd xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      g(i) = ((*this)(xp) - (*this)(xm)) / (2 * h);
    }
    return g;
  }

 private:
  const std::vector<PartialMeasurement>& meas_;
};

struct LocalResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

LocalResult bfgs(const CholeskyObjective& obj, Eigen::VectorXd x,
                 int max_iters, double tol) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  double f = obj(x);
  Eigen::VectorXd g = obj.gradient(x);
  LocalResult out;
  int it = 0;
  for (; it < max_iters; ++it) {
    if (g.norm() < 1e-12) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd dir = -hinv * g;
    if (dir.dot(g) > 0) {  // reset on loss of descent direction
      hinv.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    double fnew = f;
    Eigen::VectorXd xnew = x;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      xnew = x + step * dir;
      fnew = obj(xnew);
      if (fnew <= f + 1e-4 * step * g.dot(dir)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd gnew = obj.gradient(xnew);
    const Eigen::VectorXd s = xnew - x;
    const Eigen::VectorXd yv = gnew - g;
    const double sy = s.dot(yv);
    if (sy > 1e-14) {
      const Eigen::MatrixXd rho_sy = s * yv.transpose() / sy;
      hinv = (Eigen::MatrixXd::Identity(n, n) - rho_sy) * hinv *
                 (Eigen::MatrixXd::Identity(n, n) - rho_sy.transpose()) +
             s * s.transpose() / sy;
    }
    const double decrease = f - fnew;
    x = xnew;
    g = gnew;
    f = fnew;
    if (decrease < tol * std::max(1.0, std::abs(f))) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.x = x;
  out.f = f;
  out.iterations = it;
  return out;
}

// Levenberg-Marquardt polish: the masked distance is a least-squares
// objective, so a few damped Gauss-Newton steps drive the BFGS result to the
// exact optimum (the noiseless pipeline needs objective values near machine
// precision).
LocalResult gauss_newton_polish(const CholeskyObjective& obj, LocalResult in,
                                int max_iters = 30);

// Optima on the boundary of the state space (rank-deficient, e.g. pure
// targets) leave the factor landscape quartically flat along the vanishing
// eigenvalue. When the returned state carries a small eigenvalue, retry from
// the rank-truncated projections, which snap such optima onto the boundary.
LocalResult refine_boundary(const CholeskyObjective& obj, LocalResult in) {
  if (in.f < 1e-22) return in;
  CholeskyParams p{std::vector<double>(in.x.data(), in.x.data() + 9), 3};
  const DensityMatrix rho = to_density(p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.mat);
  if (es.eigenvalues()(0) > 0.02) return in;  // comfortably interior

  LocalResult best = in;
  for (int drop = 1; drop <= 2; ++drop) {
    Eigen::MatrixXcd trunc = Eigen::MatrixXcd::Zero(3, 3);
    double norm = 0.0;
    for (int i = drop; i < 3; ++i) {  // eigenvalues ascend
      const double ev = std::max(es.eigenvalues()(i), 0.0);
      trunc += ev * es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
      norm += ev;
    }
    if (norm <= 0.0) continue;
    const CholeskyParams tp = cholesky_params_from(DensityMatrix(trunc / norm));
    Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(tp.v.data(), 9);
    if (x0.norm() > 0) x0.normalize();
    LocalResult cand;
    cand.x = x0;
    cand.converged = in.converged;
    cand = gauss_newton_polish(obj, std::move(cand), 15);
    if (cand.f < best.f) best = cand;
  }
  return best;
}

LocalResult gauss_newton_polish(const CholeskyObjective& obj, LocalResult in,
                                int max_iters) {
  Eigen::VectorXd x = in.x;
  Eigen::VectorXd r = obj.residuals(x);
  double f = r.squaredNorm();
  double lambda = 1e-8;
  const int n = static_cast<int>(x.size());
  for (int it = 0; it < max_iters; ++it) {
    Eigen::MatrixXd jac(r.size(), n);
    for (int i = 0; i < n; ++i) {
      const double h = 1e-7 * std::max(1.0, std::abs(x(i)));
      Eigen::VectorXd xp = x;
      xp(i) += h;
      jac.col(i) = (obj.residuals(xp) - r) / h;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::MatrixXd m = jtj;
      m.diagonal().array() += lambda * (jtj.diagonal().array() + 1e-12);
      const Eigen::VectorXd step = m.ldlt().solve(-jtr);
      const Eigen::VectorXd xn = x + step;
      const Eigen::VectorXd rn = obj.residuals(xn);
      const double fn = rn.squaredNorm();
      if (fn < f) {
        x = xn;
        r = rn;
        f = fn;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        break;
      }
      lambda *= 10.0;
    }
    ++in.iterations;
    if (!improved || f < 1e-30) break;
  }
  in.x = x;
  in.f = f;
  return in;
}

}  // namespace

ReconstructionResult minimize(const std::vector<PartialMeasurement>& measurements,
                              const MinimizeOptions& options) {
  if (measurements.empty())
    throw std::invalid_argument("minimize: no measurements");
  CholeskyObjective obj(measurements);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  ReconstructionResult best;
  double best_f = std::numeric_limits<double>::infinity();
  double best_purity = 2.0;
  int total_iters = 0;

  for (int start = 0; start <= options.restarts; ++start) {
    Eigen::VectorXd x0(9);
    if (start == 0) {
      // Maximally mixed start: identity factor, unit normalized.
      x0.setZero();
      x0(0) = x0(1) = x0(2) = 1.0 / std::sqrt(3.0);
    } else {
      for (int i = 0; i < 9; ++i) x0(i) = gauss(rng);
      x0.normalize();
    }
    LocalResult local = bfgs(obj, x0, options.max_iterations, options.tolerance);
    local = gauss_newton_polish(obj, std::move(local));
    local = refine_boundary(obj, std::move(local));
    total_iters += local.iterations;

    CholeskyParams p{std::vector<double>(local.x.data(), local.x.data() + 9), 3};
    DensityMatrix rho = to_density(p);
    const double f_raw = obj.raw(local.x);
    const double pur = purity(rho);
    // relative tie window: equal-objective optima go to the less pure state
    const double f_tol = 1e-6 * std::max(std::abs(f_raw), std::abs(best_f));
    const bool better = f_raw < best_f - f_tol;
    const bool tie_lower_purity =
        std::abs(f_raw - best_f) <= f_tol && pur < best_purity;
    if (better || tie_lower_purity) {
      best_f = f_raw;
      best_purity = pur;
      best.rho = rho;
      best.distance = f_raw;
      best.converged = local.converged;
    }
  }
  best.iterations = total_iters;
  return best;
}

ReconstructionResult reconstruct(const DensityMatrix& rho_true,
                                 const std::vector<PulseAngles>& pulses,
                                 const TransitionSpec& spec,
                                 const ProbeConfig& probe,
                                 const PipelineOptions& options) {
  if (pulses.empty())
    throw std::invalid_argument("reconstruct: need at least one pulse");
  const std::vector<double> grid =
      options.time_grid.empty() ? default_time_grid(probe) : options.time_grid;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const bool noisy = options.snr > 0.0 && !std::isinf(options.snr);
  const double ref_amp = noisy ? reference_amplitude(spec, probe) : 0.0;

  std::vector<PartialMeasurement> measurements;
  measurements.reserve(pulses.size());
  for (const PulseAngles& nominal : pulses) {
    PulseAngles executed = nominal;
    if (options.angle_sigma > 0.0)
      executed = PulseAngles(nominal.phi + options.angle_sigma * gauss(rng),
                             nominal.theta + options.angle_sigma * gauss(rng));
    SignalTrace trace = signal(rho_true, executed, spec, probe, grid);
    if (noisy) {
      NoiseSpec ns{options.snr, rng(), ref_amp};
      trace = add_noise(trace, ns);
    }
    const FitResult fit = fit_envelope(trace, probe.larmor, probe.gamma_g);
    measurements.push_back(invert_fit(fit, nominal, spec, probe,
                                      options.minimize.use_weights));
  }

  MinimizeOptions mopts = options.minimize;
  mopts.seed = options.seed ^ 0x9e3779b97f4a7c15ull;
  ReconstructionResult result = minimize(measurements, mopts);
  result.rank_deficient = measurement_rank(pulses) < 8;
  result.fidelity_vs_truth = fidelity(result.rho, rho_true);
  return result;
}

ReconstructionResult reconstruct_from_traces(
    const std::vector<SignalTrace>& traces, const TransitionSpec& spec,
    const ProbeConfig& probe, const MinimizeOptions& options) {
  if (traces.empty())
    throw std::invalid_argument("reconstruct_from_traces: no traces");
  std::vector<PartialMeasurement> measurements;
  std::vector<PulseAngles> pulses;
  for (const SignalTrace& tr : traces) {
    const FitResult fit = fit_envelope(tr, probe.larmor, probe.gamma_g);
    measurements.push_back(
        invert_fit(fit, tr.meta.pulse, spec, probe, options.use_weights));
    pulses.push_back(tr.meta.pulse);
  }
  ReconstructionResult result = minimize(measurements, options);
  result.rank_deficient = measurement_rank(pulses) < 8;
  return result;
}

}  // namespace qtomo
