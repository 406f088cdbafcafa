#include <doctest.h>

#include <chrono>
#include <random>

#include "betti_heights/error.hpp"
#include "betti_heights/weierstrass.hpp"

using namespace bh;

namespace {

const RatFun t = RatFun::variable();

EllipticSurface flagship() { return EllipticSurface(-t, t); }
Section p11() { return Section::affine(RatFun(1), RatFun(1)); }

Poly small_poly(std::mt19937_64& rng, int max_deg) {
  std::uniform_int_distribution<int> deg(0, max_deg), c(-3, 3);
  std::vector<BigRational> v(static_cast<std::size_t>(deg(rng)) + 1);
  for (auto& x : v) x = c(rng);
  return Poly(v);
}

// A surface through two prescribed points: solve the curve equation for a, b.
struct TwoPoint {
  EllipticSurface s;
  Section p, q;
};

std::optional<TwoPoint> two_point_surface(std::mt19937_64& rng) {
  const RatFun x1 = small_poly(rng, 1), y1 = small_poly(rng, 2);
  const RatFun x2 = small_poly(rng, 1), y2 = small_poly(rng, 2);
  if (x1 == x2) return std::nullopt;
  const RatFun a = (y1 * y1 - y2 * y2 - x1 * x1 * x1 + x2 * x2 * x2) / (x1 - x2);
  const RatFun b = y1 * y1 - x1 * x1 * x1 - a * x1;
  try {
    EllipticSurface s(a, b);
    return TwoPoint{s, Section::affine(x1, y1), Section::affine(x2, y2)};
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

TEST_CASE("surface construction") {
  const EllipticSurface s = flagship();
  // -16 (4(-t)^3 + 27 t^2) = 64 t^3 - 432 t^2
  CHECK(s.discriminant() == RatFun(Poly{0, 0, -432, 64}));
  REQUIRE(s.bad_fibers().size() == 2);
  CHECK(std::abs(s.bad_fibers()[0].t) < 1e-12);
  CHECK(std::abs(s.bad_fibers()[1].t - 6.75) < 1e-12);
  CHECK(s.bad_at_infinity());
  CHECK(s.infinity_weight() == 1);
  for (const auto& f : s.bad_fibers()) {
    const cplx v = s.discriminant().eval(f.t);
    CHECK(std::abs(v) <= 1e-10 * 432);
  }

  CHECK_THROWS_AS(EllipticSurface(RatFun(0), RatFun(0)), Error);
  const EllipticSurface c(RatFun(0), RatFun(1));
  CHECK(c.bad_fibers().empty());
  CHECK_FALSE(c.bad_at_infinity());
  CHECK(c.discriminant() == RatFun(-16 * 27));
}

TEST_CASE("infinity model") {
  const EllipticSurface s = flagship();
  const EllipticSurface w = s.infinity_model();
  // a_w = -w^3, b_w = w^5
  CHECK(w.a() == -t.pow(3));
  CHECK(w.b() == t.pow(5));
  const Section pw = s.section_at_infinity(p11());
  CHECK(w.contains(pw));
  CHECK(w.contains(s.section_at_infinity(section_mul(s, 3, p11()))));
}

TEST_CASE("group law examples") {
  const EllipticSurface s = flagship();
  const Section P = p11();
  CHECK(s.contains(P));
  CHECK(section_add(s, P, Section::zero()) == P);
  CHECK(section_add(s, P, Section::affine(RatFun(1), RatFun(-1))).is_zero());
  const Section P2 = section_add(s, P, P);
  CHECK(P2.x() == parse_ratfun("(t^2-6t+1)/4"));
  CHECK(s.contains(P2));
  CHECK(section_mul(s, 0, P).is_zero());
  CHECK(section_mul(s, -1, P) == Section::affine(RatFun(1), RatFun(-1)));
  CHECK(section_mul(s, 2, P) == P2);
  CHECK(naive_height(s, Section::zero()) == 0);
  CHECK(naive_height(s, P) == 0);
  CHECK(naive_height(s, P2) == 2);
}

TEST_CASE("random group law identities") {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int trial = 0; trial < 60 && checked < 25; ++trial) {
    auto tp = two_point_surface(rng);
    if (!tp) continue;
    ++checked;
    const auto& s = tp->s;
    const Section P = tp->p, Q = tp->q;
    REQUIRE(s.contains(P));
    REQUIRE(s.contains(Q));
    const Section R = section_add(s, P, Q);
    CHECK(s.contains(R));
    CHECK(R == section_add(s, Q, P));
    const Section S2 = section_add(s, section_add(s, P, Q), R);
    CHECK(S2 == section_add(s, P, section_add(s, Q, R)));
    CHECK(section_add(s, R, section_neg(R)).is_zero());
    CHECK(section_mul(s, 3, P) == section_add(s, P, section_double(s, P)));
  }
  CHECK(checked >= 10);
}

TEST_CASE("x-only doubling matches full doubling") {
  const EllipticSurface s = flagship();
  Section Q = section_mul(s, 3, p11());
  for (int k = 0; k < 2; ++k) {
    const Section D = section_double(s, Q);
    CHECK(*double_x(s, Q.x()) == D.x());
    Q = D;
  }
}

TEST_CASE("tate height of torsion") {
  const EllipticSurface s(RatFun(1) - t * t, -t);
  const Section T = Section::affine(t, RatFun(0));
  REQUIRE(s.contains(T));
  const TateReport r = tate_height(s, T, {4, 20000});
  CHECK(r.value == 0.0);
  CHECK(r.error == 0.0);
  for (std::size_t k = 1; k < r.naive.size(); ++k) CHECK(r.naive[k] == 0);
  CHECK(tate_height(s, Section::zero()).value == 0.0);
}

TEST_CASE("tate fast path against rational-function chain") {
  // Independent route: iterate the doubling formula in Q(t) and sum the
  // telescoping series h(P) + sum 4^-k (h(2^k P) - 4 h(2^{k-1} P)).
  auto check = [](const EllipticSurface& s, const Section& P, int n) {
    const TateReport fast = tate_height(s, P, {n, 20000});
    RatFun x = P.x();
    double tele = static_cast<double>(x.degree());
    long prev = x.degree();
    for (int k = 1; k <= n; ++k) {
      auto nx = double_x(s, x);
      REQUIRE(nx.has_value());
      x = *nx;
      CHECK(fast.naive[static_cast<std::size_t>(k)] == x.degree());
      tele += std::ldexp(static_cast<double>(x.degree() - 4 * prev), -2 * k);
      prev = x.degree();
    }
    CHECK(fast.value == doctest::Approx(tele).epsilon(1e-14));
  };
  const EllipticSurface s = flagship();
  check(s, p11(), 4);
  check(s, section_mul(s, 3, p11()), 2);
  const EllipticSurface g(RatFun(-1) / t - t * t, RatFun(1));
  check(g, Section::affine(RatFun(0), RatFun(1)), 4);
}

TEST_CASE("tate height of the flagship section") {
  const EllipticSurface s = flagship();
  const TateReport r = tate_height(s, p11(), {6, 20000});
  // Degrees 0, 2, 8, 32, 128, 512, 2048: exactly 4^k / 2 from k = 1 on.
  CHECK(r.naive == std::vector<long>{0, 2, 8, 32, 128, 512, 2048});
  CHECK(r.value == 0.5);
  CHECK(r.quasi_constant == 2);
  CHECK(r.error == 0.0);
  // Degree 512 at the fifth doubling is over a cap of 500.
  try {
    tate_height(s, p11(), {8, 500});
    FAIL("expected the degree cap to trip");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IterationBudgetExceeded);
  }
}

TEST_CASE("tate quadraticity on a second surface") {
  const EllipticSurface g(RatFun(-1) / t - t * t, RatFun(1));
  const Section P = Section::affine(RatFun(0), RatFun(1));
  const TateReport h1 = tate_height(g, P, {4, 20000});
  for (long m : {2L, 3L}) {
    const TateReport hm = tate_height(g, section_mul(g, m, P), {4, 20000});
    CHECK(std::abs(hm.value - static_cast<double>(m * m) * h1.value) <=
          hm.error + static_cast<double>(m * m) * h1.error + 1e-12);
  }
  CHECK(h1.value > 0);
}
