#include "betti_heights/exactalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "betti_heights/error.hpp"

namespace bh {

BigRational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
          s.end());
  if (s.empty()) throw Error(ErrorKind::InvalidArgument, "empty rational literal");
  auto valid_int = [](std::string_view v) {
    std::size_t i = (!v.empty() && (v[0] == '-' || v[0] == '+')) ? 1 : 0;
    if (i >= v.size()) return false;
    for (; i < v.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(v[i]))) return false;
    return true;
  };
  BigRational q;
  const auto slash = s.find('/');
  const auto dot = s.find('.');
  if (slash == std::string::npos && dot != std::string::npos) {
    // Finite decimal such as "-0.25".
    std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
    bool neg = !whole.empty() && whole[0] == '-';
    if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) whole.erase(0, 1);
    if (whole.empty()) whole = "0";
    if (!valid_int(whole) || (!frac.empty() && !valid_int(frac)) || frac.find_first_of("+-") != std::string::npos)
      throw Error(ErrorKind::InvalidArgument, "malformed rational literal '" + s + "'");
    BigInt num(whole + frac, 10);
    BigInt den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    q = BigRational(num, den);
    if (neg) q = -q;
  } else {
    std::string num = s.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
    if (!num.empty() && num[0] == '+') num.erase(0, 1);
    if (!valid_int(num) || !valid_int(den) || den[0] == '-' || den[0] == '+')
      throw Error(ErrorKind::InvalidArgument, "malformed rational literal '" + s + "'");
    BigInt d(den, 10);
    if (d == 0) throw Error(ErrorKind::DivisionByZero, "zero denominator in '" + s + "'");
    q = BigRational(BigInt(num, 10), d);
  }
  q.canonicalize();
  return q;
}

std::string format_rational(const BigRational& value) {
  BigRational q = value;
  q.canonicalize();
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

namespace {

// mpz -> long double keeping the top 64 bits.
long double mpz_to_ld(mpz_srcptr z) {
  if (mpz_sgn(z) == 0) return 0.0L;
  const std::size_t bits = mpz_sizeinbase(z, 2);
  const std::size_t shift = bits > 64 ? bits - 64 : 0;
  mpz_class top;
  mpz_tdiv_q_2exp(top.get_mpz_t(), z, shift);
  std::uint64_t word = 0;
  std::size_t count = 0;
  mpz_export(&word, &count, -1, sizeof word, 0, 0, top.get_mpz_t());
  long double r = std::ldexp(static_cast<long double>(word), static_cast<int>(shift));
  return mpz_sgn(z) < 0 ? -r : r;
}

}  // namespace

long double to_long_double(const BigRational& q) {
  const mpz_srcptr n = q.get_num_mpz_t();
  const mpz_srcptr d = q.get_den_mpz_t();
  const long nb = static_cast<long>(mpz_sizeinbase(n, 2));
  const long db = static_cast<long>(mpz_sizeinbase(d, 2));
  if (nb < 8000 && db < 8000) return mpz_to_ld(n) / mpz_to_ld(d);
  // Scale to a ~128-bit quotient so huge operands stay finite.
  const long shift = 128 - (nb - db);
  mpz_class scaled, quo;
  if (shift >= 0)
    mpz_mul_2exp(scaled.get_mpz_t(), n, static_cast<mp_bitcnt_t>(shift));
  else
    mpz_tdiv_q_2exp(scaled.get_mpz_t(), n, static_cast<mp_bitcnt_t>(-shift));
  mpz_tdiv_q(quo.get_mpz_t(), scaled.get_mpz_t(), d);
  return std::ldexp(mpz_to_ld(quo.get_mpz_t()), static_cast<int>(-shift));
}

// ---------------------------------------------------------------- Poly

Poly::Poly(std::vector<BigRational> coeffs) : coeffs_(std::move(coeffs)) {
  // gmpxx leaves (num, den) constructions uncanonicalized.
  for (auto& c : coeffs_) c.canonicalize();
  trim();
}

Poly::Poly(std::initializer_list<long> coeffs) {
  coeffs_.reserve(coeffs.size());
  for (long c : coeffs) coeffs_.emplace_back(c);
  trim();
}

Poly Poly::constant(const BigRational& c) { return Poly(std::vector<BigRational>{c}); }

Poly Poly::monomial(const BigRational& c, int degree) {
  if (degree < 0) throw Error(ErrorKind::InvalidArgument, "negative monomial degree");
  std::vector<BigRational> v(static_cast<std::size_t>(degree) + 1);
  v.back() = c;
  return Poly(std::move(v));
}

void Poly::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

BigRational Poly::coeff(int i) const {
  if (i < 0 || i >= static_cast<int>(coeffs_.size())) return 0;
  return coeffs_[static_cast<std::size_t>(i)];
}

const BigRational& Poly::leading() const {
  if (coeffs_.empty()) throw Error(ErrorKind::InvalidArgument, "leading coefficient of zero polynomial");
  return coeffs_.back();
}

Poly Poly::operator-() const {
  Poly r = *this;
  for (auto& c : r.coeffs_) c = -c;
  return r;
}

Poly& Poly::operator+=(const Poly& rhs) {
  if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size());
  for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
  trim();
  return *this;
}

Poly& Poly::operator-=(const Poly& rhs) {
  if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size());
  for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
  trim();
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  return Poly(detail::poly_mul<BigRational>(a.coeffs_, b.coeffs_));
}

Poly& Poly::operator*=(const Poly& rhs) { return *this = *this * rhs; }

Poly& Poly::operator*=(const BigRational& c) {
  if (c == 0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& x : coeffs_) x *= c;
  return *this;
}

std::pair<Poly, Poly> Poly::divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw Error(ErrorKind::DivisionByZero, "polynomial division by zero");
  if (a.degree() < b.degree()) return {Poly(), a};
  std::vector<BigRational> r = a.coeffs_;
  const int db = b.degree();
  std::vector<BigRational> q(static_cast<std::size_t>(a.degree() - db) + 1);
  const BigRational inv = 1 / b.leading();
  for (int k = a.degree(); k >= db; --k) {
    const BigRational c = r[static_cast<std::size_t>(k)] * inv;
    if (c == 0) continue;
    q[static_cast<std::size_t>(k - db)] = c;
    for (int j = 0; j <= db; ++j) r[static_cast<std::size_t>(k - db + j)] -= c * b.coeffs_[static_cast<std::size_t>(j)];
  }
  r.resize(static_cast<std::size_t>(db));
  return {Poly(std::move(q)), Poly(std::move(r))};
}

Poly Poly::divexact(const Poly& a, const Poly& b) {
  auto [q, r] = divmod(a, b);
  if (!r.is_zero()) throw Error(ErrorKind::InvalidArgument, "inexact polynomial division");
  return q;
}

Poly Poly::gcd(const Poly& a, const Poly& b) {
  if (a.is_zero()) return b.monic();
  if (b.is_zero()) return a.monic();
  if (a.is_constant() || b.is_constant()) return constant(1);
  // Primitive PRS over Z keeps coefficient growth in check.
  zpoly::ZPoly u = zpoly::from_rational(a), v = zpoly::from_rational(b);
  zpoly::make_primitive(u);
  zpoly::make_primitive(v);
  if (u.size() < v.size()) std::swap(u, v);
  while (!v.empty()) {
    // pseudo-remainder of u by v
    zpoly::ZPoly r = u;
    const BigInt lc = v.back();
    const std::size_t dv = v.size() - 1;
    while (r.size() >= v.size()) {
      const BigInt lead = r.back();
      const std::size_t shift = r.size() - v.size();
      for (auto& c : r) c *= lc;
      for (std::size_t j = 0; j <= dv; ++j) r[shift + j] -= lead * v[j];
      zpoly::trim(r);
    }
    zpoly::make_primitive(r);
    u = std::move(v);
    v = std::move(r);
  }
  return zpoly::to_rational(u).monic();
}

Poly Poly::monic() const {
  if (is_zero()) return *this;
  Poly r = *this;
  const BigRational inv = 1 / leading();
  r *= inv;
  return r;
}

Poly Poly::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<BigRational> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<long>(i);
  return Poly(std::move(d));
}

Poly Poly::squarefree_part() const {
  if (is_constant()) return monic();
  return divexact(*this, gcd(*this, derivative())).monic();
}

Poly Poly::pow(unsigned e) const {
  Poly result = constant(1), base = *this;
  while (e) {
    if (e & 1U) result *= base;
    e >>= 1U;
    if (e) base *= base;
  }
  return result;
}

Poly Poly::reversed(int target_degree) const {
  if (target_degree < degree())
    throw Error(ErrorKind::InvalidArgument, "reversal degree below polynomial degree");
  if (is_zero()) return {};
  std::vector<BigRational> r(static_cast<std::size_t>(target_degree) + 1);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) r[static_cast<std::size_t>(target_degree) - i] = coeffs_[i];
  return Poly(std::move(r));
}

BigRational Poly::eval(const BigRational& x) const {
  BigRational acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

cplx Poly::eval(cplx z) const {
  cplx acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + it->get_d();
  return acc;
}

cplxl Poly::eval(cplxl z) const {
  cplxl acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + to_long_double(*it);
  return acc;
}

std::vector<cplx> Poly::roots() const {
  const int n = degree();
  if (n <= 0) return {};
  std::vector<cplx> out;
  if (n == 1) {
    out.push_back(-coeffs_[0].get_d() / coeffs_[1].get_d());
    return out;
  }
  std::vector<long double> c(coeffs_.size());
  const long double lead = to_long_double(leading());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) c[i] = to_long_double(coeffs_[i]) / lead;

  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -static_cast<double>(c[static_cast<std::size_t>(i)]);
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  const auto ev = es.eigenvalues();

  // Newton polish in extended precision on the monic polynomial.
  for (int k = 0; k < n; ++k) {
    cplxl z(ev[k].real(), ev[k].imag());
    for (int it = 0; it < 60; ++it) {
      cplxl p = 1.0L, dp = 0.0L;
      for (int i = n - 1; i >= 0; --i) {
        dp = dp * z + p;
        p = p * z + c[static_cast<std::size_t>(i)];
      }
      if (std::abs(dp) == 0.0L) break;
      const cplxl step = p / dp;
      z -= step;
      if (std::abs(step) <= 1e-19L * (1.0L + std::abs(z))) break;
    }
    out.emplace_back(static_cast<double>(z.real()), static_cast<double>(z.imag()));
  }
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

std::string Poly::to_string(std::string_view var) const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = coeffs_.size(); i-- > 0;) {
    const BigRational& c = coeffs_[i];
    if (c == 0) continue;
    BigRational mag = abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    const bool unit = mag == 1;
    if (i == 0 || !unit) {
      const bool frac = mag.get_den() != 1;
      if (frac && i > 0) os << "(" << format_rational(mag) << ")";
      else os << format_rational(mag);
      if (i > 0) os << "*";
    }
    if (i >= 1) os << var;
    if (i >= 2) os << "^" << i;
  }
  return os.str();
}

// ---------------------------------------------------------------- RatFun

RatFun::RatFun(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw Error(ErrorKind::DivisionByZero, "rational function with zero denominator");
  normalize();
}

void RatFun::normalize() {
  if (num_.is_zero()) {
    den_ = Poly::constant(1);
    return;
  }
  if (!den_.is_constant()) {
    Poly g = Poly::gcd(num_, den_);
    if (!g.is_constant()) {
      num_ = Poly::divexact(num_, g);
      den_ = Poly::divexact(den_, g);
    }
  }
  const BigRational inv = 1 / den_.leading();
  num_ *= inv;
  den_ *= inv;
}

bool RatFun::is_normalized() const {
  if (den_.is_zero() || den_.leading() != 1) return false;
  if (num_.is_zero()) return den_ == Poly::constant(1);
  return Poly::gcd(num_, den_) == Poly::constant(1);
}

int RatFun::degree() const noexcept {
  if (num_.is_zero()) return 0;
  return std::max(num_.degree(), den_.degree());
}

int RatFun::order_at_infinity() const noexcept {
  if (num_.is_zero()) return std::numeric_limits<int>::max() / 2;
  return den_.degree() - num_.degree();
}

RatFun RatFun::operator-() const { return RatFun(Raw{}, -num_, den_); }

RatFun operator+(const RatFun& f, const RatFun& g) {
  if (f.den_ == g.den_) return RatFun(f.num_ + g.num_, f.den_);
  return RatFun(f.num_ * g.den_ + g.num_ * f.den_, f.den_ * g.den_);
}

RatFun operator-(const RatFun& f, const RatFun& g) { return f + (-g); }

RatFun operator*(const RatFun& f, const RatFun& g) {
  if (f.is_zero() || g.is_zero()) return RatFun();
  // Cross-cancel first so the products stay reduced.
  const Poly g1 = Poly::gcd(f.num_, g.den_);
  const Poly g2 = Poly::gcd(g.num_, f.den_);
  Poly n = Poly::divexact(f.num_, g1) * Poly::divexact(g.num_, g2);
  Poly d = Poly::divexact(f.den_, g2) * Poly::divexact(g.den_, g1);
  const BigRational inv = 1 / d.leading();
  n *= inv;
  d *= inv;
  return RatFun(RatFun::Raw{}, std::move(n), std::move(d));
}

RatFun operator/(const RatFun& f, const RatFun& g) {
  if (g.is_zero()) throw Error(ErrorKind::DivisionByZero, "division by the zero function");
  const BigRational inv = 1 / g.num_.leading();
  return f * RatFun(RatFun::Raw{}, g.den_ * inv, g.num_ * inv);
}

RatFun RatFun::pow(int e) const {
  if (e < 0) return RatFun(1) / pow(-e);
  if (e == 0) return RatFun(1);
  return RatFun(Raw{}, num_.pow(static_cast<unsigned>(e)), den_.pow(static_cast<unsigned>(e)));
}

RatFun RatFun::derivative() const {
  return RatFun(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
}

RatFun RatFun::invert_variable() const {
  if (is_zero()) return *this;
  const int n = num_.degree(), d = den_.degree();
  const int m = std::max(n, d);
  // f(1/w) = w^{m-n} rev(num) / (w^{m-d} rev(den))
  return RatFun(num_.reversed(n) * Poly::monomial(1, m - n), den_.reversed(d) * Poly::monomial(1, m - d));
}

cplx RatFun::eval(cplx z, Precision precision) const {
  const double scale = std::pow(1.0 + std::abs(z), den_.degree());
  if (precision == Precision::Double) {
    const cplx d = den_.eval(z);
    if (std::abs(d) <= 1e-12 * scale) throw Error(ErrorKind::PoleAtPoint, "evaluation at a pole");
    return num_.eval(z) / d;
  }
  const cplxl zl(z.real(), z.imag());
  const cplxl d = den_.eval(zl);
  if (std::abs(d) <= 1e-15L * scale) throw Error(ErrorKind::PoleAtPoint, "evaluation at a pole");
  const cplxl v = num_.eval(zl) / d;
  return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

std::string RatFun::to_string(std::string_view var) const {
  if (den_ == Poly::constant(1)) return num_.to_string(var);
  auto wrap = [&](const Poly& p) {
    const std::string s = p.to_string(var);
    return p.coeffs().size() > 1 || s.find_first_of(" */") != std::string::npos ? "(" + s + ")" : s;
  };
  return wrap(num_) + "/" + wrap(den_);
}

RatFun ratfun_arith(ArithOp op, const RatFun& f, const RatFun& g) {
  switch (op) {
    case ArithOp::Add: return f + g;
    case ArithOp::Sub: return f - g;
    case ArithOp::Mul: return f * g;
    case ArithOp::Div: return f / g;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown arithmetic operation");
}

// ---------------------------------------------------------------- parser

namespace {

class ExprParser {
 public:
  explicit ExprParser(std::string_view s) : s_(s) {}

  RatFun parse() {
    RatFun r = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::InvalidArgument,
                what + " at offset " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  RatFun expr() {
    RatFun acc;
    bool neg = false;
    if (eat('-')) neg = true;
    else eat('+');
    acc = term();
    if (neg) acc = -acc;
    for (;;) {
      if (eat('+')) acc = acc + term();
      else if (eat('-')) acc = acc - term();
      else return acc;
    }
  }

  RatFun term() {
    RatFun acc = factor();
    for (;;) {
      if (eat('*')) {
        acc = acc * factor();
      } else if (eat('/')) {
        acc = acc / factor();
      } else {
        // implicit multiplication: "2t", "3(t+1)"
        skip();
        if (pos_ < s_.size() && (s_[pos_] == '(' || s_[pos_] == 't' || std::isdigit(static_cast<unsigned char>(s_[pos_]))))
          acc = acc * factor();
        else
          return acc;
      }
    }
  }

  RatFun factor() {
    RatFun base = atom();
    if (eat('^')) {
      skip();
      bool neg = eat('-');
      skip();
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("expected integer exponent");
      const int e = std::stoi(std::string(s_.substr(start, pos_ - start)));
      if (e > 100000) fail("exponent too large");
      base = base.pow(neg ? -e : e);
    }
    return base;
  }

  RatFun atom() {
    skip();
    if (eat('(')) {
      RatFun r = expr();
      if (!eat(')')) fail("expected ')'");
      return r;
    }
    if (pos_ < s_.size() && s_[pos_] == 't') {
      ++pos_;
      return RatFun::variable();
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (start == pos_) fail("expected number, 't' or '('");
    return RatFun::constant(parse_rational(s_.substr(start, pos_ - start)));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

RatFun parse_ratfun(std::string_view text) { return ExprParser(text).parse(); }

// ---------------------------------------------------------------- numeric cache

NumericRatFun::NumericRatFun(const RatFun& f) {
  for (const auto& c : f.num().coeffs()) {
    num_.push_back(c.get_d());
    num_l_.push_back(to_long_double(c));
  }
  for (const auto& c : f.den().coeffs()) {
    den_.push_back(c.get_d());
    den_l_.push_back(to_long_double(c));
  }
}

namespace {

template <class T, class C>
C horner(const std::vector<T>& c, C z) {
  C acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

}  // namespace

cplx NumericRatFun::operator()(cplx z, Precision precision) const {
  if (num_.empty()) return 0;
  const double scale = std::pow(1.0 + std::abs(z), static_cast<double>(den_.size() - 1));
  if (precision == Precision::Double) {
    const cplx d = horner(den_, z);
    if (std::abs(d) <= 1e-12 * scale) throw Error(ErrorKind::PoleAtPoint, "evaluation at a pole");
    return horner(num_, z) / d;
  }
  const cplxl zl(z.real(), z.imag());
  const cplxl d = horner(den_l_, zl);
  if (std::abs(d) <= 1e-15L * scale) throw Error(ErrorKind::PoleAtPoint, "evaluation at a pole");
  const cplxl v = horner(num_l_, zl) / d;
  return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

std::pair<cplx, cplx> NumericRatFun::value_and_derivative(cplx z) const {
  if (num_.empty()) return {0.0, 0.0};
  auto both = [z](const std::vector<double>& c) {
    cplx p = 0, dp = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
      dp = dp * z + p;
      p = p * z + *it;
    }
    return std::pair{p, dp};
  };
  const auto [n, dn] = both(num_);
  const auto [d, dd] = both(den_);
  return {n / d, (dn * d - n * dd) / (d * d)};
}

// ---------------------------------------------------------------- zpoly

namespace zpoly {

ZPoly from_rational(const Poly& p, BigRational* scale) {
  BigInt l = 1;
  for (const auto& c : p.coeffs()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
  ZPoly out;
  out.reserve(p.coeffs().size());
  for (const auto& c : p.coeffs()) {
    BigInt v = c.get_num() * (l / c.get_den());
    out.push_back(std::move(v));
  }
  if (scale) *scale = BigRational(l);
  return out;
}

Poly to_rational(const ZPoly& p) {
  std::vector<BigRational> c;
  c.reserve(p.size());
  for (const auto& v : p) c.emplace_back(v);
  return Poly(std::move(c));
}

void trim(ZPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

BigInt content(const ZPoly& p) {
  BigInt g = 0;
  for (const auto& c : p) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    if (g == 1) break;
  }
  return g;
}

void make_primitive(ZPoly& p) {
  trim(p);
  if (p.empty()) return;
  BigInt g = content(p);
  if (p.back() < 0) g = -g;
  if (g != 1)
    for (auto& c : p) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), g.get_mpz_t());
}

ZPoly add(const ZPoly& a, const ZPoly& b) {
  ZPoly r = a.size() >= b.size() ? a : b;
  const ZPoly& s = a.size() >= b.size() ? b : a;
  for (std::size_t i = 0; i < s.size(); ++i) r[i] += s[i];
  trim(r);
  return r;
}

ZPoly sub(const ZPoly& a, const ZPoly& b) {
  ZPoly r = a;
  if (b.size() > r.size()) r.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  trim(r);
  return r;
}

namespace {

std::size_t max_bits(const ZPoly& p) {
  std::size_t m = 0;
  for (const auto& c : p) m = std::max(m, mpz_sizeinbase(c.get_mpz_t(), 2));
  return m;
}

// Sum c_i 2^{64 w i} for coefficients with |c_i| < 2^{64 w - 1}.
BigInt pack(const ZPoly& p, std::size_t w) {
  std::vector<std::uint64_t> pos(p.size() * w, 0), neg(p.size() * w, 0);
  bool any_neg = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int sgn = mpz_sgn(p[i].get_mpz_t());
    if (sgn == 0) continue;
    auto& dst = sgn > 0 ? pos : neg;
    any_neg |= sgn < 0;
    std::size_t count = 0;
    mpz_export(dst.data() + i * w, &count, -1, sizeof(std::uint64_t), 0, 0, p[i].get_mpz_t());
  }
  BigInt r, n;
  mpz_import(r.get_mpz_t(), pos.size(), -1, sizeof(std::uint64_t), 0, 0, pos.data());
  if (any_neg) {
    mpz_import(n.get_mpz_t(), neg.size(), -1, sizeof(std::uint64_t), 0, 0, neg.data());
    r -= n;
  }
  return r;
}

// Inverse of pack with balanced digits.
ZPoly unpack(const BigInt& value, std::size_t w, std::size_t n) {
  ZPoly out(n);
  if (value == 0) return out;
  const bool negative = value < 0;
  std::vector<std::uint64_t> limbs((mpz_sizeinbase(value.get_mpz_t(), 2) + 63) / 64 + 1, 0);
  std::size_t count = 0;
  mpz_export(limbs.data(), &count, -1, sizeof(std::uint64_t), 0, 0, value.get_mpz_t());
  limbs.resize(std::max(limbs.size(), n * w), 0);
  BigInt half, full;
  mpz_setbit(half.get_mpz_t(), 64 * w - 1);
  mpz_setbit(full.get_mpz_t(), 64 * w);
  bool carry = false;
  for (std::size_t i = 0; i < n; ++i) {
    BigInt d;
    mpz_import(d.get_mpz_t(), w, -1, sizeof(std::uint64_t), 0, 0, limbs.data() + i * w);
    if (carry) d += 1;
    carry = d >= half;
    if (carry) d -= full;
    out[i] = negative ? BigInt(-d) : d;
  }
  return out;
}

}  // namespace

ZPoly mul(const ZPoly& a, const ZPoly& b) {
  if (a.empty() || b.empty()) return {};
  ZPoly r;
  if (std::min(a.size(), b.size()) < 8) {
    r = detail::poly_mul<BigInt>(a, b);
  } else {
    // Kronecker substitution: one big-integer product instead of many.
    std::size_t bits = max_bits(a) + max_bits(b) + 2;
    for (std::size_t m = std::min(a.size(), b.size()); m > 1; m >>= 1) ++bits;
    const std::size_t w = (bits + 1 + 63) / 64;
    const BigInt prod = pack(a, w) * pack(b, w);
    r = unpack(prod, w, a.size() + b.size() - 1);
  }
  trim(r);
  return r;
}

ZPoly scale(const ZPoly& a, const BigInt& c) {
  if (c == 0) return {};
  ZPoly r = a;
  for (auto& v : r) v *= c;
  return r;
}

ZPoly divexact(const ZPoly& a, const ZPoly& b) {
  if (b.empty()) throw Error(ErrorKind::DivisionByZero, "integer polynomial division by zero");
  if (a.size() < b.size()) {
    if (a.empty()) return {};
    throw Error(ErrorKind::InvalidArgument, "inexact integer polynomial division");
  }
  ZPoly r = a;
  const std::size_t db = b.size() - 1;
  ZPoly q(a.size() - db);
  const BigInt& lc = b.back();
  for (std::size_t k = a.size(); k-- > db;) {
    if (r[k] == 0) continue;
    if (!mpz_divisible_p(r[k].get_mpz_t(), lc.get_mpz_t()))
      throw Error(ErrorKind::InvalidArgument, "inexact integer polynomial division");
    BigInt c;
    mpz_divexact(c.get_mpz_t(), r[k].get_mpz_t(), lc.get_mpz_t());
    for (std::size_t j = 0; j <= db; ++j) r[k - db + j] -= c * b[j];
    q[k - db] = std::move(c);
  }
  for (std::size_t i = 0; i < db; ++i)
    if (r[i] != 0) throw Error(ErrorKind::InvalidArgument, "inexact integer polynomial division");
  trim(q);
  return q;
}

Poly rem(const ZPoly& a, const Poly& b) { return Poly::divmod(to_rational(a), b).second; }

ZPoly rem_scaled(const ZPoly& a, const ZPoly& b) {
  if (b.empty()) throw Error(ErrorKind::DivisionByZero, "integer polynomial division by zero");
  const std::size_t d = b.size() - 1;
  if (d == 0) return {};
  if (a.size() <= d) return a;
  const BigInt& c = b.back();
  // Invariant: r == c^e * (a_top + ... ) mod b with deg r < d.
  ZPoly r(d);
  BigInt cpow = 1;
  for (std::size_t i = a.size(); i-- > 0;) {
    // r <- c * r * t - lead * b, where lead is the t^d coefficient of r * t
    const BigInt lead = r[d - 1];
    for (std::size_t j = d - 1; j > 0; --j) r[j] = c * r[j - 1] - lead * b[j];
    r[0] = -lead * b[0];
    cpow *= c;
    r[0] += cpow * a[i];
  }
  trim(r);
  return r;
}

}  // namespace zpoly

}  // namespace bh
