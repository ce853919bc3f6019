#include "svarspec/ratfield.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "svarspec/errors.hpp"

namespace svarspec {

Rational parse_rational(const std::string& text) {
  auto valid_int = [](const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
  };
  const auto slash = text.find('/');
  const std::string num = text.substr(0, slash);
  const std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
  if (!valid_int(num) || !valid_int(den) || den[0] == '-' || den[0] == '+') {
    throw FormatError("invalid rational literal '" + text + "' (expected \"p/q\")");
  }
  Rational r;
  r.get_num() = mpz_class(num[0] == '+' ? num.substr(1) : num);
  r.get_den() = mpz_class(den);
  if (r.get_den() == 0) throw FormatError("zero denominator in '" + text + "'");
  r.canonicalize();
  return r;
}

std::string format_rational(const Rational& value) {
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

// ---------------------------------------------------------------- Poly

Poly::Poly(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

Poly::Poly(std::initializer_list<Rational> coeffs) : coeffs_(coeffs) { trim(); }

Poly Poly::constant(const Rational& c) { return Poly(std::vector<Rational>{c}); }

Poly Poly::monomial(const Rational& c, std::size_t k) {
  if (c == 0) return {};
  std::vector<Rational> v(k + 1);
  v[k] = c;
  return Poly(std::move(v));
}

void Poly::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Rational Poly::coeff(std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : Rational(0); }

const Rational& Poly::leading() const {
  if (coeffs_.empty()) throw DivisionByZeroError("leading coefficient of the zero polynomial");
  return coeffs_.back();
}

std::size_t Poly::valuation() const {
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    if (coeffs_[k] != 0) return k;
  }
  return 0;
}

Poly Poly::monic() const {
  if (is_zero()) return {};
  Poly out = *this;
  const Rational lead = leading();
  if (lead == 1) return out;
  for (auto& c : out.coeffs_) c /= lead;
  return out;
}

Poly Poly::conj() const {
  Poly out;
  out.coeffs_.assign(coeffs_.rbegin(), coeffs_.rend());
  out.trim();
  return out;
}

Poly Poly::shift_down(std::size_t k) const {
  if (k == 0 || is_zero()) return *this;
  if (valuation() < k) throw DivisionByZeroError("shift_down past the valuation");
  return Poly(std::vector<Rational>(coeffs_.begin() + static_cast<std::ptrdiff_t>(k), coeffs_.end()));
}

Poly Poly::shift_up(std::size_t k) const {
  if (k == 0 || is_zero()) return *this;
  std::vector<Rational> v(k);
  v.insert(v.end(), coeffs_.begin(), coeffs_.end());
  return Poly(std::move(v));
}

Rational Poly::eval(const Rational& x) const {
  Rational acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::complex<double> Poly::eval(std::complex<double> x) const {
  std::complex<double> acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + it->get_d();
  return acc;
}

Poly Poly::operator-() const {
  Poly out = *this;
  for (auto& c : out.coeffs_) c = -c;
  return out;
}

Poly& Poly::operator+=(const Poly& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size());
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  trim();
  return *this;
}

Poly& Poly::operator-=(const Poly& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size());
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) coeffs_[k] -= other.coeffs_[k];
  trim();
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<Rational> out(a.coeffs_.size() + b.coeffs_.size() - 1);
  Rational tmp;
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    if (a.coeffs_[i] == 0) continue;
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
      mpq_mul(tmp.get_mpq_t(), a.coeffs_[i].get_mpq_t(), b.coeffs_[j].get_mpq_t());
      out[i + j] += tmp;
    }
  }
  return Poly(std::move(out));
}

Poly& Poly::operator*=(const Poly& other) { return *this = *this * other; }

Poly& Poly::operator*=(const Rational& c) {
  if (c == 0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& x : coeffs_) x *= c;
  return *this;
}

std::string Poly::to_string(const std::string& var) const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    const Rational& c = coeffs_[k];
    if (c == 0) continue;
    Rational mag = abs(c);
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    if (k == 0 || mag != 1) os << mag.get_str();
    if (k > 0) {
      if (mag != 1) os << "*";
      os << var;
      if (k > 1) os << "^" << k;
    }
  }
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Poly& p) { return os << p.to_string(); }

std::pair<Poly, Poly> divmod(const Poly& f, const Poly& g) {
  if (g.is_zero()) throw DivisionByZeroError("polynomial division by zero");
  if (f.degree() < g.degree()) return {Poly{}, f};
  std::vector<Rational> rem = f.coeffs();
  const auto& gc = g.coeffs();
  const std::size_t dg = gc.size() - 1;
  std::vector<Rational> quot(rem.size() - dg);
  const Rational inv_lead = 1 / gc.back();
  Rational tmp;
  for (std::size_t k = rem.size(); k-- > dg;) {
    if (rem[k] == 0) continue;
    const Rational q = rem[k] * inv_lead;
    quot[k - dg] = q;
    for (std::size_t j = 0; j <= dg; ++j) {
      mpq_mul(tmp.get_mpq_t(), q.get_mpq_t(), gc[j].get_mpq_t());
      rem[k - dg + j] -= tmp;
    }
  }
  rem.resize(dg);
  return {Poly(std::move(quot)), Poly(std::move(rem))};
}

Poly divexact(const Poly& f, const Poly& g) {
  auto [q, r] = divmod(f, g);
  if (!r.is_zero()) throw Error("divexact: nonzero remainder");
  return q;
}

Poly gcd(const Poly& f, const Poly& g) {
  if (f.is_zero() && g.is_zero()) throw DivisionByZeroError("gcd(0, 0) is undefined");
  if (f.is_zero()) return g.monic();
  if (g.is_zero()) return f.monic();
  if (f.degree() == 0 || g.degree() == 0) return Poly::constant(1);
  Poly a = f.monic();
  Poly b = g.monic();
  if (a.degree() < b.degree()) std::swap(a, b);
  while (!b.is_zero()) {
    Poly r = divmod(a, b).second;
    a = std::move(b);
    b = r.monic();
    if (b.degree() == 0) return Poly::constant(1);
  }
  return a.monic();
}

Rational resultant(const Poly& f, const Poly& g) {
  if (f.is_zero() || g.is_zero()) return 0;
  const int m = f.degree();
  const int n = g.degree();
  const int size = m + n;
  if (size == 0) return 1;
  // Sylvester matrix, then exact Gaussian elimination over Q.
  std::vector<std::vector<Rational>> s(size, std::vector<Rational>(size));
  for (int r = 0; r < n; ++r)
    for (int k = 0; k <= m; ++k) s[r][r + k] = f.coeff(m - k);
  for (int r = 0; r < m; ++r)
    for (int k = 0; k <= n; ++k) s[n + r][r + k] = g.coeff(n - k);
  Rational det = 1;
  for (int c = 0; c < size; ++c) {
    int p = c;
    while (p < size && s[p][c] == 0) ++p;
    if (p == size) return 0;
    if (p != c) {
      std::swap(s[p], s[c]);
      det = -det;
    }
    det *= s[c][c];
    for (int r = c + 1; r < size; ++r) {
      if (s[r][c] == 0) continue;
      const Rational factor = s[r][c] / s[c][c];
      for (int k = c; k < size; ++k) s[r][k] -= factor * s[c][k];
    }
  }
  return det;
}

// ---------------------------------------------------------------- RatFn

RatFn::RatFn(const Rational& c) : num_(Poly::constant(c)), den_(Poly::constant(1)) {}

RatFn::RatFn(Poly num) : num_(std::move(num)), den_(Poly::constant(1)) {}

RatFn::RatFn(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw DivisionByZeroError("rational function with zero denominator");
  normalize();
}

void RatFn::normalize() {
  if (num_.is_zero()) {
    den_ = Poly::constant(1);
    return;
  }
  if (den_.degree() > 0 && num_.degree() > 0) {
    Poly g = gcd(num_, den_);
    if (g.degree() > 0) {
      num_ = divexact(num_, g);
      den_ = divexact(den_, g);
    }
  }
  const Rational lead = den_.leading();
  if (lead != 1) {
    const Rational inv = 1 / lead;
    num_ *= inv;
    den_ *= inv;
  }
}

RatFn RatFn::conj() const {
  if (is_zero()) return *this;
  const int shift = den_.degree() - num_.degree();
  Poly n = num_.conj();
  Poly d = den_.conj();
  if (shift > 0) n = n.shift_up(static_cast<std::size_t>(shift));
  if (shift < 0) d = d.shift_up(static_cast<std::size_t>(-shift));
  return RatFn(std::move(n), std::move(d));
}

RatFn RatFn::inverse() const {
  if (is_zero()) throw DivisionByZeroError("inverse of the zero rational function");
  return RatFn(den_, num_);
}

Rational RatFn::eval(const Rational& x) const {
  const Rational d = den_.eval(x);
  if (d == 0) {
    throw PoleError({x.get_d(), 0.0}, "pole at z = " + x.get_str());
  }
  return num_.eval(x) / d;
}

std::complex<double> RatFn::eval(std::complex<double> x) const {
  const std::complex<double> d = den_.eval(x);
  double scale = 0.0;
  double power = 1.0;
  for (const auto& c : den_.coeffs()) {
    scale += std::abs(c.get_d()) * power;
    power *= std::abs(x);
  }
  if (std::abs(d) <= 1e-14 * scale) {
    std::ostringstream os;
    os << "pole at z = " << x;
    throw PoleError(x, os.str());
  }
  return num_.eval(x) / d;
}

RatFn RatFn::operator-() const { return RatFn(-num_, den_, Canonical{}); }

RatFn& RatFn::operator+=(const RatFn& o) {
  if (o.is_zero()) return *this;
  if (is_zero()) return *this = o;
  if (den_ == o.den_) {
    num_ += o.num_;
  } else {
    num_ = num_ * o.den_ + o.num_ * den_;
    den_ = den_ * o.den_;
  }
  normalize();
  return *this;
}

RatFn& RatFn::operator-=(const RatFn& o) { return *this += -o; }

RatFn& RatFn::operator*=(const RatFn& o) {
  if (is_zero()) return *this;
  if (o.is_zero()) return *this = RatFn();
  // Cross-cancel first so the products stay small.
  Poly g1 = gcd(num_, o.den_);
  Poly g2 = gcd(o.num_, den_);
  Poly n1 = g1.degree() > 0 ? divexact(num_, g1) : num_;
  Poly d2 = g1.degree() > 0 ? divexact(o.den_, g1) : o.den_;
  Poly n2 = g2.degree() > 0 ? divexact(o.num_, g2) : o.num_;
  Poly d1 = g2.degree() > 0 ? divexact(den_, g2) : den_;
  num_ = n1 * n2;
  den_ = d1 * d2;
  const Rational lead = den_.leading();
  if (lead != 1) {
    const Rational inv = 1 / lead;
    num_ *= inv;
    den_ *= inv;
  }
  return *this;
}

RatFn& RatFn::operator/=(const RatFn& o) { return *this *= o.inverse(); }

std::string RatFn::to_string() const {
  if (den_.degree() == 0) return num_.to_string();
  return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
}

std::ostream& operator<<(std::ostream& os, const RatFn& r) { return os << r.to_string(); }

RatFn z_fn() { return RatFn(Poly::monomial(1, 1)); }

RatFn sum(const std::vector<RatFn>& terms) {
  // Terms sharing a denominator are added without any gcd.
  std::vector<std::pair<Poly, Poly>> groups;  // (den, num)
  for (const RatFn& t : terms) {
    if (t.is_zero()) continue;
    auto it = std::find_if(groups.begin(), groups.end(), [&t](const auto& g) { return g.first == t.den(); });
    if (it == groups.end()) {
      groups.emplace_back(t.den(), t.num());
    } else {
      it->second += t.num();
    }
  }
  if (groups.empty()) return RatFn();
  Poly lcm = groups.front().first;
  for (std::size_t i = 1; i < groups.size(); ++i) {
    lcm *= divexact(groups[i].first, gcd(lcm, groups[i].first));
  }
  Poly num;
  for (const auto& [den, part] : groups) num += part * divexact(lcm, den);
  return RatFn(std::move(num), std::move(lcm));
}

}  // namespace svarspec
