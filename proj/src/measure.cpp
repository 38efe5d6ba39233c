#include "qtomo/measure.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace qtomo {

double reference_amplitude(const TransitionSpec& spec, const ProbeConfig& probe) {
  const SignalTrace tr = signal(reference_state("aligned_y"), PulseAngles(0, 0),
                                spec, probe, default_time_grid(probe));
  double peak = 0.0;
  for (double v : tr.delta_alpha) peak = std::max(peak, std::abs(v));
  return peak;
}

SignalTrace add_noise(const SignalTrace& trace, const NoiseSpec& noise) {
  if (noise.snr <= 0.0 || noise.reference_amplitude <= 0.0)
    throw std::invalid_argument("add_noise: snr and reference amplitude must be positive");
  SignalTrace out = trace;
  if (std::isinf(noise.snr)) return out;
  const double sigma = noise.reference_amplitude / noise.snr;
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (double& v : out.delta_alpha) v += gauss(rng);
  out.meta.snr = noise.snr;
  out.meta.seed = noise.seed;
  return out;
}

namespace {

Eigen::Matrix<double, Eigen::Dynamic, 3> design_matrix(
    const std::vector<double>& times, double larmor, double gamma) {
  Eigen::Matrix<double, Eigen::Dynamic, 3> x(times.size(), 3);
  for (size_t k = 0; k < times.size(); ++k) {
    const double env = std::exp(-gamma * times[k]);
    x(k, 0) = env * std::sin(2.0 * larmor * times[k]);
    x(k, 1) = env * std::cos(2.0 * larmor * times[k]);
    x(k, 2) = env;
  }
  return x;
}

}  // namespace

FitResult fit_envelope(const SignalTrace& trace, double larmor, double gamma) {
  const size_t n = trace.times.size();
  if (n < 4) throw std::invalid_argument("fit_envelope: need at least 4 samples");
  const auto x = design_matrix(trace.times, larmor, gamma);
  const Eigen::Vector3d xty =
      x.transpose() * Eigen::Map<const Eigen::VectorXd>(trace.delta_alpha.data(), n);
  const Eigen::Matrix3d xtx = x.transpose() * x;

  Eigen::LDLT<Eigen::Matrix3d> ldlt(xtx);
  if (ldlt.info() != Eigen::Success ||
      ldlt.vectorD().minCoeff() < 1e-12 * ldlt.vectorD().maxCoeff())
    throw std::runtime_error("fit_envelope: singular design matrix (degenerate time grid)");

  const Eigen::Vector3d p = ldlt.solve(xty);
  const Eigen::VectorXd resid =
      Eigen::Map<const Eigen::VectorXd>(trace.delta_alpha.data(), n) - x * p;
  const double sse = resid.squaredNorm();

  FitResult fit;
  fit.A = p(0);
  fit.B = p(1);
  fit.C = p(2);
  fit.residual_rms = std::sqrt(sse / n);
  const double sigma2 = sse / std::max<size_t>(n - 3, 1);
  fit.covariance = sigma2 * ldlt.solve(Eigen::Matrix3d::Identity());
  return fit;
}

RefinedFit fit_envelope_refined(const SignalTrace& trace, double larmor0,
                                double gamma0, int max_iters) {
  // Coordinate Gauss-Newton on (larmor, gamma); each evaluation re-solves the
  // inner linear problem, so the refinement cannot leave the model family.
  double w = larmor0, g = gamma0;
  auto sse = [&](double ww, double gg) {
    const auto x = design_matrix(trace.times, ww, gg);
    const size_t n = trace.times.size();
    Eigen::Map<const Eigen::VectorXd> y(trace.delta_alpha.data(), n);
    const Eigen::Vector3d p = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    return (y - x * p).squaredNorm();
  };
  int it = 0;
  for (; it < max_iters; ++it) {
    bool moved = false;
    for (int axis = 0; axis < 2; ++axis) {
      double& v = axis == 0 ? w : g;
      const double h = std::max(std::abs(v), 1e-3) * 1e-4;
      const double f0 = sse(w, g);
      const double fp = axis == 0 ? sse(w + h, g) : sse(w, g + h);
      const double fm = axis == 0 ? sse(w - h, g) : sse(w, g - h);
      const double d1 = (fp - fm) / (2 * h);
      const double d2 = (fp - 2 * f0 + fm) / (h * h);
      if (d2 <= 0.0) continue;
      const double step = -d1 / d2;
      if (std::abs(step) < 1e-12 * std::max(std::abs(v), 1.0)) continue;
      v += std::clamp(step, -0.2 * std::abs(v), 0.2 * std::abs(v));
      moved = true;
    }
    if (!moved) break;
  }
  RefinedFit out;
  out.larmor = w;
  out.gamma = g;
  out.iterations = it;
  out.fit = fit_envelope(trace, w, g);
  return out;
}

}  // namespace qtomo
