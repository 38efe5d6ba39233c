#include "qtomo/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qtomo {

namespace {

// Immutable table, safe for concurrent readers; by value so callers never
// hold references across further factorial() calls.
BigInt factorial(int n) {
  static const std::vector<BigInt> cache = [] {
    std::vector<BigInt> c(201);
    c[0] = 1;
    for (int i = 1; i <= 200; ++i) c[i] = c[i - 1] * i;
    return c;
  }();
  if (n < static_cast<int>(cache.size())) return cache.at(n);
  BigInt v = cache.back();
  for (int i = static_cast<int>(cache.size()); i <= n; ++i) v *= i;
  return v;
}

int parity(HalfInt h) {  // (-1)^h for integer-valued h
  return h.as_int() % 2 == 0 ? 1 : -1;
}

// Delta(a,b,c) = (a+b-c)!(a-b+c)!(-a+b+c)! / (a+b+c+1)!, the squared
// triangle coefficient.
BigRational triangle_delta(HalfInt a, HalfInt b, HalfInt c) {
  return BigRational(factorial((a + b - c).as_int()) *
                         factorial((a - b + c).as_int()) *
                         factorial((-a + b + c).as_int()),
                     factorial((a + b + c).as_int() + 1));
}

int sgn(const BigRational& q) {
  if (q == 0) return 0;
  return q > 0 ? 1 : -1;
}

}  // namespace

SqrtRational SqrtRational::of(const BigRational& q) {
  if (q == 0) return zero();
  return {sgn(q), q * q};
}

double SqrtRational::value() const {
  if (sign == 0) return 0.0;
  return sign * std::sqrt(boost::multiprecision::numerator(radicand).convert_to<double>() /
                          boost::multiprecision::denominator(radicand).convert_to<double>());
}

SqrtRational SqrtRational::times(const BigRational& q) const {
  if (sign == 0 || q == 0) return zero();
  return {sign * sgn(q), radicand * q * q};
}

bool SqrtRational::operator==(const SqrtRational& other) const {
  if (sign == 0 && other.sign == 0) return true;
  return sign == other.sign && radicand == other.radicand;
}

bool triangle_ok(HalfInt a, HalfInt b, HalfInt c) {
  if ((a + b + c).twice() % 2 != 0) return false;  // perimeter must be integer
  return (a + b - c).twice() >= 0 && (a - b + c).twice() >= 0 &&
         (-a + b + c).twice() >= 0;
}

SqrtRational wigner3j_exact(HalfInt j1, HalfInt j2, HalfInt j3,
                            HalfInt m1, HalfInt m2, HalfInt m3) {
  if ((m1 + m2 + m3).twice() != 0) return SqrtRational::zero();
  if (!triangle_ok(j1, j2, j3)) return SqrtRational::zero();
  if (!HalfInt::valid_projection(j1, m1) || !HalfInt::valid_projection(j2, m2) ||
      !HalfInt::valid_projection(j3, m3))
    return SqrtRational::zero();

  // Racah sum; all factorial arguments below are nonnegative integers.
  const int kmin = std::max({0, (j2 - j3 - m1).twice() / 2, (j1 - j3 + m2).twice() / 2});
  const int kmax = std::min({(j1 + j2 - j3).as_int(), (j1 - m1).as_int(), (j2 + m2).as_int()});
  if (kmin > kmax) return SqrtRational::zero();

  BigRational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    BigInt den = factorial(k) * factorial((j1 + j2 - j3).as_int() - k) *
                 factorial((j1 - m1).as_int() - k) * factorial((j2 + m2).as_int() - k) *
                 factorial((j3 - j2 + m1).as_int() + k) * factorial((j3 - j1 - m2).as_int() + k);
    BigRational term(1, den);
    sum += (k % 2 == 0) ? term : -term;
  }
  if (sum == 0) return SqrtRational::zero();

  BigRational a = triangle_delta(j1, j2, j3);
  a *= factorial((j1 + m1).as_int());
  a *= factorial((j1 - m1).as_int());
  a *= factorial((j2 + m2).as_int());
  a *= factorial((j2 - m2).as_int());
  a *= factorial((j3 + m3).as_int());
  a *= factorial((j3 - m3).as_int());

  const int phase = parity(j1 - j2 - m3);
  return {phase * sgn(sum), a * sum * sum};
}

SqrtRational wigner6j_exact(HalfInt j1, HalfInt j2, HalfInt j3,
                            HalfInt j4, HalfInt j5, HalfInt j6) {
  if (!triangle_ok(j1, j2, j3) || !triangle_ok(j1, j5, j6) ||
      !triangle_ok(j4, j2, j6) || !triangle_ok(j4, j5, j3))
    return SqrtRational::zero();

  const int t1 = (j1 + j2 + j3).as_int();
  const int t2 = (j1 + j5 + j6).as_int();
  const int t3 = (j4 + j2 + j6).as_int();
  const int t4 = (j4 + j5 + j3).as_int();
  const int q1 = (j1 + j2 + j4 + j5).as_int();
  const int q2 = (j2 + j3 + j5 + j6).as_int();
  const int q3 = (j1 + j3 + j4 + j6).as_int();

  const int kmin = std::max({t1, t2, t3, t4});
  const int kmax = std::min({q1, q2, q3});
  if (kmin > kmax) return SqrtRational::zero();

  BigRational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    BigInt den = factorial(k - t1) * factorial(k - t2) * factorial(k - t3) *
                 factorial(k - t4) * factorial(q1 - k) * factorial(q2 - k) *
                 factorial(q3 - k);
    BigRational term(factorial(k + 1), den);
    sum += (k % 2 == 0) ? term : -term;
  }
  if (sum == 0) return SqrtRational::zero();

  BigRational a = triangle_delta(j1, j2, j3) * triangle_delta(j1, j5, j6) *
                  triangle_delta(j4, j2, j6) * triangle_delta(j4, j5, j3);
  return {sgn(sum), a * sum * sum};
}

double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3,
                HalfInt m1, HalfInt m2, HalfInt m3) {
  return wigner3j_exact(j1, j2, j3, m1, m2, m3).value();
}

double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3,
                HalfInt j4, HalfInt j5, HalfInt j6) {
  return wigner6j_exact(j1, j2, j3, j4, j5, j6).value();
}

Eigen::MatrixXd wigner_d(HalfInt j, double theta) {
  const int dim = j.twice() + 1;
  Eigen::MatrixXd d(dim, dim);
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);

  auto fact = [](int n) { return factorial(n).convert_to<double>(); };

  for (int a = 0; a < dim; ++a) {      // row: m' = -j + a
    for (int b = 0; b < dim; ++b) {    // col: m  = -j + b
      const HalfInt mp = HalfInt::from_twice(-j.twice() + 2 * a);
      const HalfInt m = HalfInt::from_twice(-j.twice() + 2 * b);
      const double pref = std::sqrt(fact((j + mp).as_int()) * fact((j - mp).as_int()) *
                                    fact((j + m).as_int()) * fact((j - m).as_int()));
      const int kmin = std::max(0, (m - mp).as_int());
      const int kmax = std::min((j + m).as_int(), (j - mp).as_int());
      double sum = 0.0;
      for (int k = kmin; k <= kmax; ++k) {
        const int mpm = (mp - m).as_int();
        const double den = fact((j + m).as_int() - k) * fact(k) *
                           fact((j - mp).as_int() - k) * fact(mpm + k);
        const double sign = ((mpm + k) % 2 == 0) ? 1.0 : -1.0;
        sum += sign / den *
               std::pow(c, (j + m).as_int() + (j - mp).as_int() - 2 * k) *
               std::pow(s, mpm + 2 * k);
      }
      d(a, b) = pref * sum;
    }
  }
  return d;
}

Eigen::MatrixXcd rotation_operator(HalfInt j, double phi, double theta) {
  const int dim = j.twice() + 1;
  const Eigen::MatrixXd d = wigner_d(j, theta);
  Eigen::MatrixXcd op(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      const double m = -j.value() + b;
      op(a, b) = d(a, b) * std::exp(std::complex<double>(0.0, -phi * m));
    }
  return op;
}

Eigen::Matrix3cd spherical_to_cartesian() {
  using std::complex;
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix3cd u;
  // columns: q = -1, 0, +1 (contravariant components, so the y row carries
  // -i; this is the orientation for which the full detection chain in
  // liouville reproduces the analytic signal model, see test_liouville)
  u << complex<double>(r, 0), 0, complex<double>(-r, 0),    // x
      complex<double>(0, -r), 0, complex<double>(0, -r),    // y
      0, 1, 0;                                              // z
  return u;
}

}  // namespace qtomo
