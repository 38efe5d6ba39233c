#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace qtomo {

/// Angular momentum quantum number stored as twice its value, so that
/// half-integers (1/2, 3/2, ...) are represented exactly.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  constexpr HalfInt(int integer_value) : twice_(2 * integer_value) {}

  /// Construct from twice the value: HalfInt::from_twice(3) == 3/2.
  static constexpr HalfInt from_twice(int twice) {
    HalfInt h;
    h.twice_ = twice;
    return h;
  }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return twice_ / 2.0; }

  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  /// Integer value; throws if the stored value is half-odd.
  constexpr int as_int() const {
    if (!is_integer()) throw std::logic_error("HalfInt: not an integer");
    return twice_ / 2;
  }

  /// Valid magnitude/projection pair: |m| <= j and m = j (mod 1).
  static constexpr bool valid_projection(HalfInt j, HalfInt m) {
    return std::abs(m.twice_) <= j.twice_ && (j.twice_ - m.twice_) % 2 == 0;
  }

  friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return from_twice(a.twice_ + b.twice_); }
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return from_twice(a.twice_ - b.twice_); }
  friend constexpr HalfInt operator-(HalfInt a) { return from_twice(-a.twice_); }
  friend constexpr bool operator==(HalfInt a, HalfInt b) { return a.twice_ == b.twice_; }
  friend constexpr bool operator!=(HalfInt a, HalfInt b) { return a.twice_ != b.twice_; }
  friend constexpr bool operator<(HalfInt a, HalfInt b) { return a.twice_ < b.twice_; }
  friend constexpr bool operator<=(HalfInt a, HalfInt b) { return a.twice_ <= b.twice_; }
  friend constexpr bool operator>(HalfInt a, HalfInt b) { return a.twice_ > b.twice_; }
  friend constexpr bool operator>=(HalfInt a, HalfInt b) { return a.twice_ >= b.twice_; }

  std::string str() const {
    if (is_integer()) return std::to_string(twice_ / 2);
    return std::to_string(twice_) + "/2";
  }

 private:
  int twice_ = 0;
};

/// Shorthand for n/2, e.g. halves(3) == 3/2.
constexpr HalfInt halves(int n) { return HalfInt::from_twice(n); }

}  // namespace qtomo
