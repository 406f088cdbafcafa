#include "betti_heights/weierstrass.hpp"

#include <algorithm>
#include <cmath>

#include "betti_heights/error.hpp"

namespace bh {

const RatFun& Section::x() const {
  if (zero_) throw Error(ErrorKind::InvalidArgument, "zero section has no affine coordinates");
  return x_;
}

const RatFun& Section::y() const {
  if (zero_) throw Error(ErrorKind::InvalidArgument, "zero section has no affine coordinates");
  return y_;
}

std::string Section::to_string() const {
  if (zero_) return "O";
  return "(" + x_.to_string() + ", " + y_.to_string() + ")";
}

namespace {

int ceil_div(int num, int den) { return num <= 0 ? 0 : (num + den - 1) / den; }

// Order of f at w = 0 after substituting t = 1/w.
int order_at_inf(const RatFun& f) { return f.order_at_infinity(); }

RatFun scale_by_w(const RatFun& f_inv, int power) {
  if (power == 0) return f_inv;
  return f_inv * RatFun::variable().pow(power);
}

}  // namespace

EllipticSurface::EllipticSurface(RatFun a, RatFun b) : a_(std::move(a)), b_(std::move(b)) {
  const RatFun inner = RatFun(4) * a_.pow(3) + RatFun(27) * b_.pow(2);
  if (inner.is_zero()) throw Error(ErrorKind::SingularFamily, "discriminant vanishes identically");
  disc_ = RatFun(-16) * inner;

  // Finite bad fibers: zeros of the discriminant numerator and poles of a, b.
  Poly bad = disc_.num() * a_.den() * b_.den();
  bad = bad.squarefree_part();
  for (cplx r : bad.roots()) bad_.push_back({r, false});
  for (std::size_t i = 0; i < bad_.size(); ++i)
    for (std::size_t j = 0; j < bad_.size(); ++j)
      if (i != j && std::abs(bad_[i].t - bad_[j].t) < 1e-6) bad_[i].clustered = true;

  const int oa = a_.is_zero() ? 1 << 20 : order_at_inf(a_);
  const int ob = b_.is_zero() ? 1 << 20 : order_at_inf(b_);
  inf_k_ = std::max(ceil_div(-oa, 4), ceil_div(-ob, 6));
  // Discriminant of the weighted model at w = 0.
  const int od = order_at_inf(disc_) + 12 * inf_k_;
  bad_inf_ = od > 0;

  a_num_ = NumericRatFun(a_);
  b_num_ = NumericRatFun(b_);
}

RatFun EllipticSurface::j_invariant() const {
  // j = 1728 * 4a^3 / (4a^3 + 27b^2)
  const RatFun a3 = RatFun(4) * a_.pow(3);
  return RatFun(1728) * a3 / (a3 + RatFun(27) * b_.pow(2));
}

EllipticSurface EllipticSurface::infinity_model() const {
  return EllipticSurface(scale_by_w(a_.invert_variable(), 4 * inf_k_),
                         scale_by_w(b_.invert_variable(), 6 * inf_k_));
}

Section EllipticSurface::section_at_infinity(const Section& p) const {
  if (p.is_zero()) return p;
  return Section::affine(scale_by_w(p.x().invert_variable(), 2 * inf_k_),
                         scale_by_w(p.y().invert_variable(), 3 * inf_k_));
}

bool EllipticSurface::contains(const Section& p) const {
  if (p.is_zero()) return true;
  const RatFun& x = p.x();
  return p.y() * p.y() == x * x * x + a_ * x + b_;
}

Section section_neg(const Section& p) {
  if (p.is_zero()) return p;
  return Section::affine(p.x(), -p.y());
}

Section section_double(const EllipticSurface& s, const Section& p) {
  if (p.is_zero() || p.y().is_zero()) return Section::zero();
  const RatFun& x = p.x();
  const RatFun lambda = (RatFun(3) * x * x + s.a()) / (RatFun(2) * p.y());
  const RatFun x3 = lambda * lambda - RatFun(2) * x;
  const RatFun y3 = lambda * (x - x3) - p.y();
  return Section::affine(x3, y3);
}

Section section_add(const EllipticSurface& s, const Section& p, const Section& q) {
  if (p.is_zero()) return q;
  if (q.is_zero()) return p;
  if (p.x() == q.x()) {
    if (p.y() == q.y()) return section_double(s, p);
    return Section::zero();  // q = -p
  }
  const RatFun lambda = (q.y() - p.y()) / (q.x() - p.x());
  const RatFun x3 = lambda * lambda - p.x() - q.x();
  const RatFun y3 = lambda * (p.x() - x3) - p.y();
  return Section::affine(x3, y3);
}

Section section_mul(const EllipticSurface& s, long m, const Section& p) {
  if (m < 0) return section_mul(s, -m, section_neg(p));
  Section acc = Section::zero(), base = p;
  while (m > 0) {
    if (m & 1) acc = section_add(s, acc, base);
    m >>= 1;
    if (m > 0) base = section_double(s, base);
  }
  return acc;
}

long naive_height(const EllipticSurface&, const Section& p) {
  if (p.is_zero()) return 0;
  return p.x().degree();
}

std::optional<RatFun> double_x(const EllipticSurface& s, const RatFun& x) {
  const RatFun g = x * x * x + s.a() * x + s.b();
  if (g.is_zero()) return std::nullopt;
  const RatFun x2 = x * x;
  const RatFun f = x2 * x2 - RatFun(2) * s.a() * x2 - RatFun(8) * s.b() * x + s.a() * s.a();
  return f / (RatFun(4) * g);
}

namespace {

using zpoly::ZPoly;

struct IntFrac {
  ZPoly num, den;
};

// f = num/den with integer coefficients.
IntFrac integer_fraction(const RatFun& f) {
  BigRational sn, sd;
  ZPoly n = zpoly::from_rational(f.num(), &sn);
  ZPoly d = zpoly::from_rational(f.den(), &sd);
  // f = (n / sn) / (d / sd) = n*sd / (d*sn)
  const BigInt cn = sd.get_num(), cd = sn.get_num();
  IntFrac r{zpoly::scale(n, cn), zpoly::scale(d, cd)};
  return r;
}

long zdeg(const ZPoly& p) { return static_cast<long>(p.size()) - 1; }

// Removes the common factor of (A, B), which is supported on roots of q.
void cancel_on(ZPoly& A, ZPoly& B, const Poly& q) {
  if (!q.is_constant()) {
    ZPoly qz = zpoly::from_rational(q);
    zpoly::make_primitive(qz);
    auto common = [](const ZPoly& f, const ZPoly& m) {
      ZPoly g = zpoly::from_rational(Poly::gcd(zpoly::to_rational(zpoly::rem_scaled(f, m)), zpoly::to_rational(m)));
      zpoly::make_primitive(g);
      return g;
    };
    for (;;) {
      ZPoly g = common(A, qz);
      if (g.size() <= 1) break;
      g = common(B, g);
      if (g.size() <= 1) break;
      A = zpoly::divexact(A, g);
      B = zpoly::divexact(B, g);
    }
  }
  // Remove common integer content as well.
  BigInt c = zpoly::content(A);
  mpz_gcd(c.get_mpz_t(), c.get_mpz_t(), zpoly::content(B).get_mpz_t());
  if (c > 1) {
    for (auto& v : A) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), c.get_mpz_t());
    for (auto& v : B) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), c.get_mpz_t());
  }
}

}  // namespace

TateReport tate_height(const EllipticSurface& s, const Section& p, const TateOptions& opts) {
  if (opts.n_iters < 1) throw Error(ErrorKind::InvalidArgument, "n_iters must be positive");
  TateReport rep;
  auto record = [&](long h, int k) {
    rep.naive.push_back(h);
    rep.estimates.push_back(std::ldexp(static_cast<double>(h), -2 * k));
  };

  if (p.is_zero()) {
    for (int k = 0; k <= opts.n_iters; ++k) record(0, k);
    rep.torsion_at = 0;
    return rep;
  }

  const IntFrac a = integer_fraction(s.a()), b = integer_fraction(s.b());
  const Poly q = (s.discriminant().num() * s.a().den() * s.b().den()).squarefree_part();

  IntFrac x = integer_fraction(p.x());
  record(std::max(zdeg(x.num), zdeg(x.den)), 0);
  bool dead = false;
  cancel_on(x.num, x.den, Poly());
  if (x.den.back() < 0) {
    x.num = zpoly::scale(x.num, -1);
    x.den = zpoly::scale(x.den, -1);
  }
  std::vector<IntFrac> seen{x};

  const ZPoly ad2 = zpoly::mul(a.den, a.den);
  const ZPoly ad2bd = zpoly::mul(ad2, b.den);
  const ZPoly adbd = zpoly::mul(a.den, b.den);
  const ZPoly an2bd = zpoly::mul(zpoly::mul(a.num, a.num), b.den);
  const ZPoly bnad2 = zpoly::mul(b.num, ad2);
  const ZPoly anadbd = zpoly::mul(a.num, adbd);

  for (int k = 1; k <= opts.n_iters; ++k) {
    if (dead) {
      record(0, k);
      continue;
    }
    const ZPoly& N = x.num;
    const ZPoly& D = x.den;
    const ZPoly N2 = zpoly::mul(N, N), D2 = zpoly::mul(D, D);
    const ZPoly N3 = zpoly::mul(N2, N), D3 = zpoly::mul(D2, D);
    const ZPoly N2D2 = zpoly::mul(N2, D2);

    // x(2Q) = A / B for x(Q) = N / D, a = an/ad, b = bn/bd.
    ZPoly A = zpoly::mul(zpoly::mul(N2, N2), ad2bd);
    A = zpoly::sub(A, zpoly::scale(zpoly::mul(anadbd, N2D2), 2));
    A = zpoly::sub(A, zpoly::scale(zpoly::mul(bnad2, zpoly::mul(N, D3)), 8));
    A = zpoly::add(A, zpoly::mul(an2bd, zpoly::mul(D2, D2)));

    ZPoly G = zpoly::mul(N3, ad2bd);
    G = zpoly::add(G, zpoly::mul(anadbd, zpoly::mul(N, D2)));
    G = zpoly::add(G, zpoly::mul(bnad2, D3));
    if (G.empty()) {
      // Q is 2-torsion, so 2Q and every further double is the identity.
      dead = true;
      rep.torsion_at = k;
      record(0, k);
      continue;
    }
    ZPoly B = zpoly::scale(zpoly::mul(D, G), 4);

    cancel_on(A, B, q);
    const long h = std::max(zdeg(A), zdeg(B));
    if (h > opts.degree_cap)
      throw Error(ErrorKind::IterationBudgetExceeded,
                  "degree " + std::to_string(h) + " exceeds cap at doubling step " + std::to_string(k));
    if (B.back() < 0) {
      A = zpoly::scale(A, -1);
      B = zpoly::scale(B, -1);
    }
    record(h, k);
    x = IntFrac{std::move(A), std::move(B)};
    // A repeat in the doubling orbit means P is torsion.
    if (!rep.torsion_at &&
        std::find_if(seen.begin(), seen.end(), [&](const IntFrac& f) { return f.num == x.num && f.den == x.den; }) != seen.end())
      rep.torsion_at = k;
    seen.push_back(x);
  }

  for (std::size_t k = 1; k < rep.naive.size(); ++k)
    rep.quasi_constant = std::max(rep.quasi_constant, std::abs(rep.naive[k] - 4 * rep.naive[k - 1]));
  if (rep.torsion_at) {
    // Exact limit for torsion: the orbit is finite.
    rep.value = 0.0;
    rep.error = 0.0;
    return rep;
  }
  rep.value = rep.estimates.back();
  rep.error = std::abs(rep.estimates.back() - rep.estimates[rep.estimates.size() - 2]);
  return rep;
}

}  // namespace bh
