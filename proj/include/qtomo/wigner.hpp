#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Dense>
#include <complex>

#include "qtomo/half_int.hpp"

namespace qtomo {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/// Exact value of the form sign * sqrt(radicand), radicand a nonnegative
/// rational. Closed under multiplication, which is what symbol identities
/// need; sums are handled by callers (squares are plain rationals).
struct SqrtRational {
  int sign = 0;                 // -1, 0, +1
  BigRational radicand = 0;     // >= 0; meaningless when sign == 0

  static SqrtRational zero() { return {}; }
  static SqrtRational of(const BigRational& q);  // sign(q) * sqrt(q^2) = q

  /// The exact square, sign folded in as sign of nothing (squares are >= 0).
  BigRational squared() const { return sign == 0 ? BigRational(0) : radicand; }

  double value() const;

  friend SqrtRational operator*(const SqrtRational& a, const SqrtRational& b) {
    if (a.sign == 0 || b.sign == 0) return zero();
    return {a.sign * b.sign, a.radicand * b.radicand};
  }
  /// Scale by an exact rational factor.
  SqrtRational times(const BigRational& q) const;

  bool operator==(const SqrtRational& other) const;
};

/// Wigner 3j symbol by the Racah sum over exact integer factorials.
/// Invalid couplings (m-sum, triangle, projection) give exact zero.
SqrtRational wigner3j_exact(HalfInt j1, HalfInt j2, HalfInt j3,
                            HalfInt m1, HalfInt m2, HalfInt m3);

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}, exact.
SqrtRational wigner6j_exact(HalfInt j1, HalfInt j2, HalfInt j3,
                            HalfInt j4, HalfInt j5, HalfInt j6);

double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3,
                HalfInt m1, HalfInt m2, HalfInt m3);
double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3,
                HalfInt j4, HalfInt j5, HalfInt j6);

/// Triangle condition with integer perimeter.
bool triangle_ok(HalfInt a, HalfInt b, HalfInt c);

/// Wigner small d-matrix d^j_{m'm}(theta) = <j m'| exp(-i theta J_y) |j m>.
/// Index 0 corresponds to m = -j; rows are m', columns m (ascending).
Eigen::MatrixXd wigner_d(HalfInt j, double theta);

/// Rotation operator for a control pulse: first rotate by phi about z, then
/// by theta about y (active, z-y-z convention):
///   D(phi, theta) = exp(-i theta J_y) exp(-i phi J_z),
/// so D_{m'm} = d^j_{m'm}(theta) exp(-i phi m). Unitary; basis as wigner_d.
Eigen::MatrixXcd rotation_operator(HalfInt j, double phi, double theta);

/// Unitary mapping spherical vector components to Cartesian:
/// A_cart[i] = sum_q U(i, q+1) A_sph[q], rows (x,y,z), columns q = (-1,0,+1).
/// Fixed so that d_y = -i(d_{+1} + d_{-1})/sqrt(2) (contravariant
/// components over the Condon-Shortley spherical basis; this orientation
/// makes the detection chain reproduce the analytic signal model).
Eigen::Matrix3cd spherical_to_cartesian();

}  // namespace qtomo
