#include "qtomo/density_matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace qtomo {

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / double(dim));
}

bool DensityMatrix::is_physical(double herm_tol, double trace_tol,
                                double eig_tol) const {
  if ((mat - mat.adjoint()).cwiseAbs().maxCoeff() > herm_tol) return false;
  if (std::abs(mat.trace().real() - 1.0) > trace_tol ||
      std::abs(mat.trace().imag()) > trace_tol)
    return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= eig_tol;
}

double purity(const DensityMatrix& rho) {
  return (rho.mat * rho.mat).trace().real();
}

namespace {

// Clamp to zero below a relative floor so that sqrt does not amplify
// round-off of rank-deficient inputs into 1e-8 scale artifacts.
Eigen::VectorXd clamped_sqrt(const Eigen::VectorXd& ev) {
  const double floor = 1e-13 * std::max(ev.maxCoeff(), 0.0);
  Eigen::VectorXd out = ev;
  for (int i = 0; i < out.size(); ++i)
    out(i) = out(i) > floor ? std::sqrt(out(i)) : 0.0;
  return out;
}

}  // namespace

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& herm) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  const Eigen::VectorXd ev = clamped_sqrt(es.eigenvalues());
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const DensityMatrix& rho_r, const DensityMatrix& rho_p) {
  if (rho_r.dim() != rho_p.dim())
    throw std::invalid_argument("fidelity: dimension mismatch");
  const Eigen::MatrixXcd s = psd_sqrt(rho_r.mat);
  const Eigen::MatrixXcd inner = s * rho_p.mat * s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(inner, Eigen::EigenvaluesOnly);
  const double tr = clamped_sqrt(es.eigenvalues()).sum();
  return std::min(tr * tr, 1.0);
}

DensityMatrix to_density(const CholeskyParams& params) {
  const int d = params.dim;
  if (static_cast<int>(params.v.size()) != d * d)
    throw std::invalid_argument("to_density: parameter vector must have dim^2 entries");
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(d, d);
  size_t k = 0;
  for (int i = 0; i < d; ++i) t(i, i) = params.v[k++];
  for (int i = 1; i < d; ++i)
    for (int j = 0; j < i; ++j) {
      const double re = params.v[k++];
      const double im = params.v[k++];
      t(i, j) = Cplx(re, im);
    }
  Eigen::MatrixXcd rho = t * t.adjoint();
  const double tr = rho.trace().real();
  if (tr <= 0.0) return DensityMatrix::maximally_mixed(d);
  return DensityMatrix(rho / tr);
}

CholeskyParams cholesky_params_from(const DensityMatrix& rho) {
  const int d = rho.dim();
  // Outer-product Cholesky with zero-pivot handling, so rank-deficient
  // (e.g. pure) states factor cleanly.
  Eigen::MatrixXcd a = (rho.mat + rho.mat.adjoint()) / 2.0;
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    double pivot = a(j, j).real();
    for (int k = 0; k < j; ++k) pivot -= std::norm(t(j, k));
    if (pivot < 1e-14) {
      t(j, j) = 0.0;
      continue;
    }
    t(j, j) = std::sqrt(pivot);
    for (int i = j + 1; i < d; ++i) {
      Cplx s = a(i, j);
      for (int k = 0; k < j; ++k) s -= t(i, k) * std::conj(t(j, k));
      t(i, j) = s / t(j, j).real();
    }
  }
  CholeskyParams p = CholeskyParams::zeros(d);
  size_t k = 0;
  for (int i = 0; i < d; ++i) p.v[k++] = t(i, i).real();
  for (int i = 1; i < d; ++i)
    for (int j = 0; j < i; ++j) {
      p.v[k++] = t(i, j).real();
      p.v[k++] = t(i, j).imag();
    }
  return p;
}

Eigen::MatrixXcd haar_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Cplx(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    const Cplx rii = r(i, i);
    const double mag = std::abs(rii);
    q.col(i) *= (mag > 0.0) ? rii / mag : Cplx(1.0, 0.0);
  }
  return q;
}

DensityMatrix random_pure(int dim, std::mt19937_64& rng) {
  Eigen::VectorXcd stretched = Eigen::VectorXcd::Zero(dim);
  stretched(dim - 1) = 1.0;  // m = +f
  const Eigen::VectorXcd psi = haar_unitary(dim, rng) * stretched;
  return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix random_pure(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_pure(dim, rng);
}

DensityMatrix random_mixed(int dim, std::mt19937_64& rng, double target_purity) {
  const double pmin = 1.0 / dim;
  if (target_purity < pmin - 1e-12 || target_purity > 1.0 + 1e-12)
    throw std::invalid_argument("random_mixed: target_purity outside [1/dim, 1]");
  // purity(lambda) = lambda^2 + (1 - lambda^2)/dim for the blend below
  const double lam =
      std::sqrt(std::clamp((target_purity - pmin) / (1.0 - pmin), 0.0, 1.0));
  const DensityMatrix pure = random_pure(dim, rng);
  Eigen::MatrixXcd rho = lam * pure.mat +
                         (1.0 - lam) * Eigen::MatrixXcd::Identity(dim, dim) / double(dim);
  return DensityMatrix(rho);
}

DensityMatrix random_mixed(int dim, std::uint64_t seed, double target_purity) {
  std::mt19937_64 rng(seed);
  return random_mixed(dim, rng, target_purity);
}

DensityMatrix reference_state(const std::string& name) {
  if (name == "thermal") return DensityMatrix::maximally_mixed(3);
  if (name == "stretched") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
    m(2, 2) = 1.0;  // m = +1
    return DensityMatrix(m);
  }
  if (name == "aligned_y") {
    // Strong-pump limit of y-polarized optical pumping on f=1 -> F=0:
    // half the population in |m=0>, half in the dark superposition
    // (|1> - |-1>)/sqrt(2). See test_liouville for the regeneration check.
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
    m(0, 0) = 0.25;
    m(1, 1) = 0.5;
    m(2, 2) = 0.25;
    m(0, 2) = -0.25;
    m(2, 0) = -0.25;
    return DensityMatrix(m);
  }
  throw std::invalid_argument("reference_state: unknown name '" + name + "'");
}

}  // namespace qtomo
