#include "qtomo/observables.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qtomo/wigner.hpp"

namespace qtomo {

namespace {

double wrap_angle(double a) {
  const double twopi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, twopi);
  if (r < 0) r += twopi;
  return r - std::numbers::pi;
}

}  // namespace

PulseAngles::PulseAngles(double phi_, double theta_)
    : phi(wrap_angle(phi_)), theta(wrap_angle(theta_)) {
  if (!std::isfinite(phi_) || !std::isfinite(theta_))
    throw std::invalid_argument("PulseAngles: angles must be finite");
}

ObservableSet build_observables(HalfInt f, HalfInt F) {
  const HalfInt one(1);
  if (!triangle_ok(f, one, F) || (f + F).twice() < 2)
    throw std::invalid_argument("build_observables: (f,F) not dipole-allowed");

  const int dim = f.twice() + 1;
  ObservableSet obs;
  obs.f = f;
  obs.F = F;
  obs.alpha_r = Eigen::MatrixXcd::Zero(dim, dim);
  obs.alpha_i = Eigen::MatrixXcd::Zero(dim, dim);
  obs.beta = Eigen::MatrixXcd::Zero(dim, dim);
  obs.delta = Eigen::MatrixXcd::Zero(dim, dim);

  auto idx = [&](HalfInt m) { return (m + f).as_int(); };
  const Cplx iu(0.0, 1.0);

  // Delta-m = 2 couplings |n><n+2| weighted by the product of two 3j symbols.
  for (int k = 0; k <= f.twice() - 2; ++k) {
    const HalfInt n = HalfInt::from_twice(-f.twice() + 2 * k);
    const double coeff = wigner3j(f, one, F, -(n + HalfInt(2)), one, n + one) *
                         wigner3j(F, one, f, -(n + one), one, n);
    if (coeff == 0.0) continue;
    const int a = idx(n);
    const int b = idx(n + HalfInt(2));
    obs.alpha_r(a, b) += coeff;
    obs.alpha_r(b, a) += coeff;
    obs.alpha_i(a, b) += iu * coeff;
    obs.alpha_i(b, a) += -iu * coeff;
  }

  // Diagonal population weights and the isotropic fraction.
  double dsum = 0.0;
  for (int k = 0; k <= f.twice(); ++k) {
    const HalfInt n = HalfInt::from_twice(-f.twice() + 2 * k);
    const double plus = wigner3j(f, one, F, -n, one, n - one);
    const double minus = wigner3j(f, one, F, -n, -one, n + one);
    obs.beta(idx(n), idx(n)) = plus * plus - minus * minus;
    obs.delta(idx(n), idx(n)) = plus * plus + minus * minus;
    dsum += plus * plus;
  }
  obs.delta_s = 2.0 / (f.twice() + 1.0) * dsum;
  return obs;
}

Cplx expectation(const Eigen::MatrixXcd& obs, const DensityMatrix& rho) {
  if (obs.rows() != rho.dim())
    throw std::invalid_argument("expectation: dimension mismatch");
  return (rho.mat * obs).trace();
}

double expectation_real(const Eigen::MatrixXcd& obs, const DensityMatrix& rho) {
  const Cplx v = expectation(obs, rho);
  if (std::abs(v.imag()) >= 1e-12)
    throw std::runtime_error("expectation_real: imaginary part not negligible");
  return v.real();
}

Eigen::MatrixXcd rotate_observable(const Eigen::MatrixXcd& obs,
                                   const PulseAngles& pulse, HalfInt j) {
  const Eigen::MatrixXcd q = rotation_operator(j, pulse.phi, pulse.theta);
  return q.adjoint() * obs * q;
}

DensityMatrix rotate_state(const DensityMatrix& rho, const PulseAngles& pulse) {
  const HalfInt j = HalfInt::from_twice(rho.dim() - 1);
  const Eigen::MatrixXcd q = rotation_operator(j, pulse.phi, pulse.theta);
  return DensityMatrix(q * rho.mat * q.adjoint());
}

}  // namespace qtomo
