#pragma once

// Exact univariate polynomials and rational functions over the rationals,
// together with the coefficient-reversal conjugation that agrees with
// complex conjugation of the argument on the unit circle.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace svarspec {

using Rational = mpq_class;

/// Degree reported for the zero polynomial.
inline constexpr int kZeroDegree = std::numeric_limits<int>::min();

/// Parses "p/q" or "p" (integers only, no decimal points). Throws FormatError.
Rational parse_rational(const std::string& text);
/// Always renders with an explicit denominator, e.g. "3/1".
std::string format_rational(const Rational& value);

class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Rational> coeffs);
  Poly(std::initializer_list<Rational> coeffs);

  static Poly constant(const Rational& c);
  /// c * z^k
  static Poly monomial(const Rational& c, std::size_t k);

  bool is_zero() const { return coeffs_.empty(); }
  int degree() const {
    return coeffs_.empty() ? kZeroDegree : static_cast<int>(coeffs_.size()) - 1;
  }
  /// Coefficient of z^k; zero past the degree.
  Rational coeff(std::size_t k) const;
  const Rational& leading() const;
  const std::vector<Rational>& coeffs() const { return coeffs_; }
  /// Index of the lowest nonzero coefficient (the z-adic valuation).
  std::size_t valuation() const;

  Poly monic() const;
  /// Coefficient reversal relative to the degree; conj(0) = 0.
  Poly conj() const;
  /// Divides out z^k; requires valuation() >= k.
  Poly shift_down(std::size_t k) const;
  Poly shift_up(std::size_t k) const;

  Rational eval(const Rational& x) const;
  std::complex<double> eval(std::complex<double> x) const;

  Poly operator-() const;
  Poly& operator+=(const Poly& other);
  Poly& operator-=(const Poly& other);
  Poly& operator*=(const Poly& other);
  Poly& operator*=(const Rational& c);

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(Poly a, const Rational& c) { return a *= c; }
  friend Poly operator*(const Rational& c, Poly a) { return a *= c; }
  friend bool operator==(const Poly& a, const Poly& b) { return a.coeffs_ == b.coeffs_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  std::string to_string(const std::string& var = "z") const;

 private:
  void trim();
  std::vector<Rational> coeffs_;
};

std::ostream& operator<<(std::ostream& os, const Poly& p);

/// Euclidean division over Q: returns (quotient, remainder). Throws on zero divisor.
std::pair<Poly, Poly> divmod(const Poly& f, const Poly& g);
/// Division known to be exact; throws if a remainder is left.
Poly divexact(const Poly& f, const Poly& g);
/// Monic gcd. Throws DivisionByZeroError when both inputs are zero.
Poly gcd(const Poly& f, const Poly& g);
/// Resultant over Q; zero iff f and g share a nonconstant factor.
Rational resultant(const Poly& f, const Poly& g);

/// An element of Q(z) kept in canonical form: numerator and denominator
/// coprime, denominator monic, zero stored as 0/1.
class RatFn {
 public:
  RatFn() : den_(Poly::constant(1)) {}
  RatFn(const Rational& c);  // NOLINT(google-explicit-constructor)
  RatFn(int c) : RatFn(Rational(c)) {}  // NOLINT(google-explicit-constructor)
  explicit RatFn(Poly num);
  /// Throws DivisionByZeroError when den is zero.
  RatFn(Poly num, Poly den);

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_constant() const { return num_.degree() <= 0 && den_.degree() == 0; }

  /// (f/g)* = f*/g* * z^(deg g - deg f)
  RatFn conj() const;
  /// Throws DivisionByZeroError on zero.
  RatFn inverse() const;

  /// Exact evaluation; throws PoleError when the denominator vanishes.
  Rational eval(const Rational& x) const;
  /// Floating evaluation; throws PoleError at (numerically) vanishing denominators.
  std::complex<double> eval(std::complex<double> x) const;

  RatFn operator-() const;
  RatFn& operator+=(const RatFn& o);
  RatFn& operator-=(const RatFn& o);
  RatFn& operator*=(const RatFn& o);
  RatFn& operator/=(const RatFn& o);

  friend RatFn operator+(RatFn a, const RatFn& b) { return a += b; }
  friend RatFn operator-(RatFn a, const RatFn& b) { return a -= b; }
  friend RatFn operator*(RatFn a, const RatFn& b) { return a *= b; }
  friend RatFn operator/(RatFn a, const RatFn& b) { return a /= b; }
  friend bool operator==(const RatFn& a, const RatFn& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const RatFn& a, const RatFn& b) { return !(a == b); }

  std::string to_string() const;

 private:
  struct Canonical {};
  RatFn(Poly num, Poly den, Canonical) : num_(std::move(num)), den_(std::move(den)) {}
  void normalize();

  Poly num_;
  Poly den_;
};

std::ostream& operator<<(std::ostream& os, const RatFn& r);

/// The indeterminate z as a rational function.
RatFn z_fn();

/// Exact sum of many terms over the lcm of their denominators, normalized once.
RatFn sum(const std::vector<RatFn>& terms);

}  // namespace svarspec
