#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <iosfwd>

#include <Eigen/Core>

namespace helicoid {

// Exact rational scalar. Numerator/denominator are int64 with int128
// intermediates; every operation normalizes and checks for overflow, so
// comparisons and strict inequalities are exact. Usable as an Eigen scalar
// (NumTraits specialization below) for the LP tableaus.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}  // NOLINT: implicit by design
  Rational(int n) : num_(n), den_(1) {}        // NOLINT
  Rational(long long n, long long d) { assign(n, d); }

  static Rational from_int128(__int128 n, __int128 d) {
    if (d == 0) throw std::domain_error("Rational: zero denominator");
    if (d < 0) { n = -n; d = -d; }
    __int128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) { n /= g; d /= g; }
    Rational r;
    r.num_ = checked_narrow(n);
    r.den_ = checked_narrow(d);
    return r;
  }

  long long num() const { return num_; }
  long long den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  bool is_nonnegative() const { return num_ >= 0; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_int128((__int128)a.num_ * b.den_ + (__int128)b.num_ * a.den_,
                       (__int128)a.den_ * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from_int128((__int128)a.num_ * b.den_ - (__int128)b.num_ * a.den_,
                       (__int128)a.den_ * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_int128((__int128)a.num_ * b.num_, (__int128)a.den_ * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
    return from_int128((__int128)a.num_ * b.den_, (__int128)a.den_ * b.num_);
  }
  Rational operator-() const { Rational r; r.num_ = -num_; r.den_ = den_; return r; }

  Rational& operator+=(const Rational& o) { *this = *this + o; return *this; }
  Rational& operator-=(const Rational& o) { *this = *this - o; return *this; }
  Rational& operator*=(const Rational& o) { *this = *this * o; return *this; }
  Rational& operator/=(const Rational& o) { *this = *this / o; return *this; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return (__int128)a.num_ * b.den_ < (__int128)b.num_ * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  void assign(long long n, long long d) {
    if (d == 0) throw std::domain_error("Rational: zero denominator");
    if (d < 0) { n = -n; d = -d; }
    long long g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) { n /= g; d /= g; }
    num_ = n;
    den_ = d;
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) { __int128 t = a % b; a = b; b = t; }
    return a < 0 ? -a : a;
  }

  static long long checked_narrow(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN)
      throw std::overflow_error("Rational: 64-bit overflow after reduction");
    return static_cast<long long>(v);
  }

  long long num_;
  long long den_;  // > 0
};

inline Rational abs(const Rational& r) { return r.num() < 0 ? -r : r; }
inline Rational min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

std::ostream& operator<<(std::ostream& os, const Rational& r);

// "num/den", "num", or "inf" (the caller maps inf to a zero reciprocal).
Rational parse_rational(const std::string& s);

}  // namespace helicoid

namespace Eigen {
template <>
struct NumTraits<helicoid::Rational> : GenericNumTraits<helicoid::Rational> {
  typedef helicoid::Rational Real;
  typedef helicoid::Rational NonInteger;
  typedef helicoid::Rational Nested;
  static inline Real epsilon() { return helicoid::Rational(0); }
  static inline Real dummy_precision() { return helicoid::Rational(0); }
  static inline int digits10() { return 0; }
  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 6,
    MulCost = 6
  };
};
}  // namespace Eigen
