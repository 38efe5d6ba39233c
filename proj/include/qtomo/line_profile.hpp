#pragma once

#include <complex>

namespace qtomo {

/// Lorentz profile L(Delta) = (Gamma - 2i Delta)^(-1).
std::complex<double> lorentz(double delta, double gamma_e);

/// Voigt profile: Lorentz convolved with the Doppler distribution
/// f_D(x) = exp(-x^2/Gamma_D^2)/(Gamma_D sqrt(pi)). Gamma_D = 0 returns the
/// Lorentz profile exactly. Absolute accuracy better than 1e-12 of 1/Gamma.
std::complex<double> voigt(double delta, double gamma_e, double gamma_doppler);

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im(z) >= 0.
std::complex<double> faddeeva_w(std::complex<double> z);

}  // namespace qtomo
