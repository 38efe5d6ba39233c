#pragma once

#include <Eigen/Dense>

#include "qtomo/density_matrix.hpp"
#include "qtomo/half_int.hpp"

namespace qtomo {

/// Control pulse: rotate about z by phi, then about y by theta. Angles are
/// normalized into [-pi, pi) on construction.
struct PulseAngles {
  double phi = 0.0;
  double theta = 0.0;

  PulseAngles() = default;
  PulseAngles(double phi_, double theta_);
};

/// Effective observables whose expectation values appear as signal
/// amplitudes. alpha_r/alpha_i couple Delta-m = 2 pairs; beta and delta are
/// diagonal; delta_s is the state-independent isotropic absorption fraction.
struct ObservableSet {
  Eigen::MatrixXcd alpha_r, alpha_i, beta, delta;
  double delta_s = 0.0;
  HalfInt f, F;
};

/// Assemble the observables for a dipole-allowed (f, F) pair from 3j sums.
/// Throws std::invalid_argument for forbidden pairs.
ObservableSet build_observables(HalfInt f, HalfInt F);

/// Tr(rho . obs). For Hermitian obs the result is real; expectation_real
/// checks the imaginary part is below 1e-12 and drops it.
Cplx expectation(const Eigen::MatrixXcd& obs, const DensityMatrix& rho);
double expectation_real(const Eigen::MatrixXcd& obs, const DensityMatrix& rho);

/// Observable seen after a control pulse: Q^dag X Q with
/// Q = rotation_operator(j, phi, theta). Hermiticity is preserved.
Eigen::MatrixXcd rotate_observable(const Eigen::MatrixXcd& obs,
                                   const PulseAngles& pulse, HalfInt j);

/// State after a control pulse: Q rho Q^dag, so that
/// Tr[X . Q rho Q^dag] = Tr[(Q^dag X Q) . rho].
DensityMatrix rotate_state(const DensityMatrix& rho, const PulseAngles& pulse);

}  // namespace qtomo
