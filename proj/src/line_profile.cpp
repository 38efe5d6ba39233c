#include "qtomo/line_profile.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace qtomo {

namespace {

constexpr double kSqrtPi = 1.772453850905516027;

// Weideman's rational expansion of w(z) on the upper half plane.
// Coefficients come from a one-time midpoint DFT of the transformed
// Gaussian; N = 64 keeps the error near machine precision.
struct WeidemanTable {
  static constexpr int N = 64;
  double L;
  std::array<double, N> a;

  WeidemanTable() {
    L = std::sqrt(N / std::numbers::sqrt2);
    const int M = 2 * N;
    const int M2 = 2 * M;
    std::vector<double> f(M2, 0.0);
    for (int k = -M + 1; k <= M - 1; ++k) {
      const double theta = k * std::numbers::pi / M;
      const double t = L * std::tan(theta / 2.0);
      f[k + M] = std::exp(-t * t) * (L * L + t * t);
    }
    // f[0] (k = -M) stays zero; real DFT coefficient n of fftshift(f).
    for (int n = 1; n <= N; ++n) {
      double s = 0.0;
      for (int k = 0; k < M2; ++k) {
        const int shifted = (k + M) % M2;  // fftshift
        s += f[shifted] * std::cos(2.0 * std::numbers::pi * n * k / M2);
      }
      a[N - n] = s / M2;  // store high-order first for Horner evaluation
    }
  }
};

std::complex<double> faddeeva_weideman(std::complex<double> z) {
  static const WeidemanTable tab;
  const std::complex<double> iz(-z.imag(), z.real());
  const std::complex<double> lmiz = tab.L - iz;
  const std::complex<double> zz = (tab.L + iz) / lmiz;
  std::complex<double> p = 0.0;
  for (int k = 0; k < WeidemanTable::N; ++k) p = p * zz + tab.a[k];
  return 2.0 * p / (lmiz * lmiz) + (1.0 / kSqrtPi) / lmiz;
}

// Laplace continued fraction, accurate for large |z|.
std::complex<double> faddeeva_cf(std::complex<double> z, int levels = 14) {
  std::complex<double> r = 0.0;
  for (int k = levels; k >= 1; --k) r = (k / 2.0) / (z - r);
  return std::complex<double>(0.0, 1.0 / kSqrtPi) / (z - r);
}

}  // namespace

std::complex<double> faddeeva_w(std::complex<double> z) {
  if (std::abs(z) > 12.0) return faddeeva_cf(z);
  return faddeeva_weideman(z);
}

std::complex<double> lorentz(double delta, double gamma_e) {
  return 1.0 / std::complex<double>(gamma_e, -2.0 * delta);
}

std::complex<double> voigt(double delta, double gamma_e, double gamma_doppler) {
  if (gamma_doppler == 0.0) return lorentz(delta, gamma_e);
  const std::complex<double> z(delta / gamma_doppler,
                               gamma_e / (2.0 * gamma_doppler));
  return kSqrtPi / (2.0 * gamma_doppler) * faddeeva_w(z);
}

}  // namespace qtomo
