#pragma once

// Exact arithmetic over Q, Q[t] and the function field Q(t).
//
// Coefficients are GMP rationals. Poly keeps its coefficient list trimmed so
// the zero polynomial is the empty list; RatFun keeps num/den coprime with a
// monic denominator, which makes operator== a structural comparison.

#include <gmpxx.h>

#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bh {

using BigInt = mpz_class;
using BigRational = mpq_class;
using cplx = std::complex<double>;
using cplxl = std::complex<long double>;

enum class Precision { Double, Extended };

BigRational parse_rational(std::string_view text);
std::string format_rational(const BigRational& q);
long double to_long_double(const BigRational& q);

class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<BigRational> coeffs);
  Poly(std::initializer_list<long> coeffs);

  static Poly constant(const BigRational& c);
  static Poly monomial(const BigRational& c, int degree);
  static Poly variable() { return monomial(1, 1); }

  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const noexcept { return coeffs_.empty(); }
  bool is_constant() const noexcept { return coeffs_.size() <= 1; }
  std::span<const BigRational> coeffs() const noexcept { return coeffs_; }
  BigRational coeff(int i) const;
  const BigRational& leading() const;

  Poly operator-() const;
  Poly& operator+=(const Poly& rhs);
  Poly& operator-=(const Poly& rhs);
  Poly& operator*=(const Poly& rhs);
  Poly& operator*=(const BigRational& c);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(Poly a, const BigRational& c) { return a *= c; }
  friend Poly operator*(const BigRational& c, Poly a) { return a *= c; }
  friend bool operator==(const Poly& a, const Poly& b) { return a.coeffs_ == b.coeffs_; }

  // Euclidean division; throws DivisionByZero for a zero divisor.
  static std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b);
  // Division known to be exact; throws InvalidArgument otherwise.
  static Poly divexact(const Poly& a, const Poly& b);
  // Monic gcd (zero only when both inputs are zero).
  static Poly gcd(const Poly& a, const Poly& b);

  Poly monic() const;
  Poly derivative() const;
  Poly squarefree_part() const;
  Poly pow(unsigned e) const;
  // w^deg * p(1/w) for a target degree >= deg p.
  Poly reversed(int target_degree) const;

  BigRational eval(const BigRational& x) const;
  cplx eval(cplx z) const;
  cplxl eval(cplxl z) const;

  // Numerical roots: companion-matrix eigenvalues, Newton-polished.
  std::vector<cplx> roots() const;

  std::string to_string(std::string_view var = "t") const;

 private:
  void trim();
  std::vector<BigRational> coeffs_;
};

class RatFun {
 public:
  RatFun() : den_(Poly::constant(1)) {}
  RatFun(Poly num, Poly den);
  RatFun(const Poly& p) : RatFun(p, Poly::constant(1)) {}  // NOLINT: implicit by design of K[t] ⊂ K(t)
  RatFun(long c) : RatFun(Poly::constant(c)) {}            // NOLINT

  static RatFun constant(const BigRational& c) { return RatFun(Poly::constant(c)); }
  static RatFun variable() { return RatFun(Poly::variable()); }

  const Poly& num() const noexcept { return num_; }
  const Poly& den() const noexcept { return den_; }
  bool is_zero() const noexcept { return num_.is_zero(); }
  bool is_constant() const noexcept { return num_.is_constant() && den_.is_constant(); }
  bool is_polynomial() const noexcept { return den_.degree() == 0; }

  // Degree of f as a map P^1 -> P^1; the zero function has degree 0.
  int degree() const noexcept;
  // Order of vanishing at infinity (negative for a pole), or a large
  // sentinel for the zero function.
  int order_at_infinity() const noexcept;

  RatFun operator-() const;
  friend RatFun operator+(const RatFun& f, const RatFun& g);
  friend RatFun operator-(const RatFun& f, const RatFun& g);
  friend RatFun operator*(const RatFun& f, const RatFun& g);
  friend RatFun operator/(const RatFun& f, const RatFun& g);
  RatFun& operator+=(const RatFun& g) { return *this = *this + g; }
  RatFun& operator-=(const RatFun& g) { return *this = *this - g; }
  RatFun& operator*=(const RatFun& g) { return *this = *this * g; }
  RatFun& operator/=(const RatFun& g) { return *this = *this / g; }
  friend bool operator==(const RatFun& f, const RatFun& g) {
    return f.num_ == g.num_ && f.den_ == g.den_;
  }

  RatFun pow(int e) const;
  RatFun derivative() const;
  // f(1/w) expressed in the variable w.
  RatFun invert_variable() const;

  // Throws PoleAtPoint when |den(z)| falls below the precision threshold.
  cplx eval(cplx z, Precision precision = Precision::Double) const;

  bool is_normalized() const;
  std::string to_string(std::string_view var = "t") const;

 private:
  struct Raw {};
  RatFun(Raw, Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {}
  void normalize();

  Poly num_;
  Poly den_;
};

enum class ArithOp { Add, Sub, Mul, Div };
RatFun ratfun_arith(ArithOp op, const RatFun& f, const RatFun& g);
inline int ratfun_degree(const RatFun& f) { return f.degree(); }
inline cplx ratfun_eval(const RatFun& f, cplx z, Precision p = Precision::Double) {
  return f.eval(z, p);
}

// Parses expressions such as "(t^2-6*t+1)/4" over Q in the variable t.
RatFun parse_ratfun(std::string_view text);

// Cached floating-point coefficients for hot evaluation loops.
class NumericRatFun {
 public:
  NumericRatFun() = default;
  explicit NumericRatFun(const RatFun& f);

  cplx operator()(cplx z, Precision precision = Precision::Double) const;
  // Value and derivative, no pole check.
  std::pair<cplx, cplx> value_and_derivative(cplx z) const;
  bool is_zero() const noexcept { return num_.empty(); }

 private:
  std::vector<double> num_, den_;
  std::vector<long double> num_l_, den_l_;
};

namespace detail {

inline constexpr std::size_t kKaratsubaThreshold = 32;

// Product of coefficient lists (lowest degree first) over any ring type with
// +, -, * and value-initialised zero. Karatsuba above the threshold.
template <class T>
std::vector<T> poly_mul(std::span<const T> a, std::span<const T> b,
                        std::size_t threshold = kKaratsubaThreshold);

}  // namespace detail

// Integer polynomial helpers used by the exact height machinery.
namespace zpoly {

using ZPoly = std::vector<BigInt>;

ZPoly from_rational(const Poly& p, BigRational* scale = nullptr);
Poly to_rational(const ZPoly& p);
void trim(ZPoly& p);
BigInt content(const ZPoly& p);
void make_primitive(ZPoly& p);
ZPoly add(const ZPoly& a, const ZPoly& b);
ZPoly sub(const ZPoly& a, const ZPoly& b);
ZPoly mul(const ZPoly& a, const ZPoly& b);
ZPoly scale(const ZPoly& a, const BigInt& c);
// Exact division by a primitive divisor known to divide a.
ZPoly divexact(const ZPoly& a, const ZPoly& b);
// a mod b over Q.
Poly rem(const ZPoly& a, const Poly& b);
// c^e (a mod b) for c = lc(b) and some e >= 0; fraction-free Horner, so it
// stays cheap when a has thousands of large coefficients.
ZPoly rem_scaled(const ZPoly& a, const ZPoly& b);

}  // namespace zpoly

}  // namespace bh

#include "betti_heights/detail/polymul.ipp"
