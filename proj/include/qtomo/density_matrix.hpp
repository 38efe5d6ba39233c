#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace qtomo {

using Cplx = std::complex<double>;

/// Collective density matrix over magnetic sublevels. Basis index i
/// corresponds to m = -f + i (ascending), with dim = 2f + 1.
struct DensityMatrix {
  Eigen::MatrixXcd mat;

  DensityMatrix() = default;
  explicit DensityMatrix(Eigen::MatrixXcd m) : mat(std::move(m)) {}

  int dim() const { return static_cast<int>(mat.rows()); }

  /// Element <m|rho|n> addressed by physical quantum numbers.
  Cplx at(int m, int n) const {
    const int f2 = dim() - 1;
    return mat((2 * m + f2) / 2, (2 * n + f2) / 2);
  }

  static DensityMatrix maximally_mixed(int dim);

  bool is_physical(double herm_tol = 1e-12, double trace_tol = 1e-12,
                   double eig_tol = -1e-10) const;
};

double purity(const DensityMatrix& rho);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho_r) rho_p sqrt(rho_r)))^2 in [0, 1].
/// Throws std::invalid_argument on dimension mismatch.
double fidelity(const DensityMatrix& rho_r, const DensityMatrix& rho_p);

/// Hermitian PSD square root via eigendecomposition, negative eigenvalues
/// clamped to zero.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& herm);

/// Real parameter vector of length dim^2 for a lower-triangular complex
/// factor T; to_density maps any vector to a physical state. Layout:
/// [diag (dim reals), then per-row sub-diagonal entries re,im].
struct CholeskyParams {
  std::vector<double> v;
  int dim = 3;

  static CholeskyParams zeros(int dim) {
    return {std::vector<double>(static_cast<size_t>(dim) * dim, 0.0), dim};
  }
};

/// rho = T T^dag / Tr(T T^dag); the all-zero vector maps to the maximally
/// mixed state so optimizers never see an invalid point.
DensityMatrix to_density(const CholeskyParams& params);

/// Factor a physical state back into parameters (round trip through
/// to_density reproduces rho for PSD inputs).
CholeskyParams cholesky_params_from(const DensityMatrix& rho);

/// Haar-random unitary: QR of a complex Gaussian matrix with the phase of
/// the triangular factor's diagonal normalized away.
Eigen::MatrixXcd haar_unitary(int dim, std::mt19937_64& rng);

/// Pure state |psi><psi| with psi = (Haar unitary) . stretched.
DensityMatrix random_pure(int dim, std::uint64_t seed);
DensityMatrix random_pure(int dim, std::mt19937_64& rng);

/// Convex blend of a Haar-rotated pure state with the maximally mixed
/// state, weighted to land exactly on target_purity in [1/dim, 1].
DensityMatrix random_mixed(int dim, std::uint64_t seed, double target_purity);
DensityMatrix random_mixed(int dim, std::mt19937_64& rng, double target_purity);

/// Named f=1 reference states: "thermal", "aligned_y", "stretched".
/// aligned_y is the strong-pump steady state of y-polarized optical pumping
/// (populations 1/4, 1/2, 1/4 with rho_{1,-1} = rho_{-1,1} = -1/4); the
/// liouville test suite regenerates it from the master equation.
DensityMatrix reference_state(const std::string& name);

}  // namespace qtomo
