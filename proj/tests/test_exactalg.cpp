#include <doctest.h>

#include <random>

#include "betti_heights/error.hpp"
#include "betti_heights/exactalg.hpp"

using namespace bh;

namespace {

RatFun T() { return RatFun::variable(); }

Poly random_poly(std::mt19937_64& rng, int max_deg, int coeff_range) {
  std::uniform_int_distribution<int> deg(0, max_deg), c(-coeff_range, coeff_range), d(1, 4);
  std::vector<BigRational> v(static_cast<std::size_t>(deg(rng)) + 1);
  for (auto& x : v) x = BigRational(c(rng), d(rng));
  if (v.back() == 0) v.back() = 1;
  return Poly(v);
}

}  // namespace

TEST_CASE("rational literals") {
  CHECK(parse_rational("3/6") == BigRational(1, 2));
  CHECK(parse_rational("-0.25") == BigRational(-1, 4));
  CHECK(parse_rational("7") == 7);
  CHECK(format_rational(BigRational(-6, 4)) == "-3/2");
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
  CHECK_THROWS_AS(parse_rational("x"), Error);
  CHECK(to_long_double(BigRational(1, 3)) == doctest::Approx(1.0 / 3.0).epsilon(1e-18));
}

TEST_CASE("arith examples") {
  const RatFun t = T();
  CHECK(t / (t + 1) + RatFun(1) / (t + 1) == RatFun(1));
  CHECK(t * (RatFun(1) / t) == RatFun(1));
  // (t^2-1)/(t-1) - t reduces to 1
  const RatFun q(Poly{-1, 0, 1}, Poly{-1, 1});
  CHECK(q == t + 1);
  CHECK(q - t == RatFun(1));
  CHECK_THROWS_AS(t / RatFun(0), Error);
  CHECK(ratfun_arith(ArithOp::Div, RatFun(0), t).is_zero());
}

TEST_CASE("degree examples") {
  CHECK(parse_ratfun("(t^2-6*t+1)/4").degree() == 2);
  CHECK(RatFun(5).degree() == 0);
  CHECK(RatFun(0).degree() == 0);
  CHECK(parse_ratfun("t^3/(t-1)").degree() == 3);
}

TEST_CASE("evaluation examples") {
  CHECK(std::abs(parse_ratfun("t^2+1").eval({0, 1})) < 1e-15);
  CHECK(parse_ratfun("1/t").eval(2.0) == cplx(0.5, 0));
  const cplx v = parse_ratfun("(t^2-6t+1)/4").eval({1, 1});
  // (1+i)^2 = 2i, so (2i - 6 - 6i + 1)/4 = (-5 - 4i)/4
  CHECK(std::abs(v - cplx(-1.25, -1.0)) < 1e-15);
  CHECK_THROWS_AS(parse_ratfun("1/(t-2)").eval(2.0), Error);
  const cplx ve = parse_ratfun("(t^2-6t+1)/4").eval({1, 1}, Precision::Extended);
  CHECK(std::abs(ve - cplx(-1.25, -1.0)) < 1e-15);
}

TEST_CASE("parser") {
  const RatFun t = T();
  CHECK(parse_ratfun("-t") == -t);
  CHECK(parse_ratfun("2t(t+1)") == RatFun(2) * t * (t + 1));
  CHECK(parse_ratfun("t^-2") == RatFun(1) / (t * t));
  CHECK(parse_ratfun("1/2 - t/3") == RatFun::constant(BigRational(1, 2)) - t / RatFun(3));
  CHECK_THROWS_AS(parse_ratfun("t+"), Error);
  CHECK_THROWS_AS(parse_ratfun("(t"), Error);
}

TEST_CASE("karatsuba agrees with schoolbook") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> len(1, 150), c(-1000, 1000);
    std::vector<BigInt> a(static_cast<std::size_t>(len(rng))), b(static_cast<std::size_t>(len(rng)));
    for (auto& x : a) x = c(rng);
    for (auto& x : b) x = c(rng);
    const auto fast = detail::poly_mul<BigInt>(a, b, 4);
    const auto slow = detail::poly_mul<BigInt>(a, b, 100000);
    CHECK(fast == slow);
  }
}

TEST_CASE("kronecker product agrees with schoolbook") {
  std::mt19937_64 rng(5);
  gmp_randclass gmp_rand(gmp_randinit_default);
  gmp_rand.seed(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<int> len(1, 90), bits(1, 400), sign(0, 1);
    auto make = [&] {
      zpoly::ZPoly p(static_cast<std::size_t>(len(rng)));
      for (auto& x : p) {
        x = gmp_rand.get_z_bits(static_cast<mp_bitcnt_t>(bits(rng)));
        if (sign(rng)) x = -x;
      }
      zpoly::trim(p);
      return p;
    };
    const auto a = make(), b = make();
    auto slow = detail::poly_mul<BigInt>(a, b, 100000);
    zpoly::trim(slow);
    CHECK(zpoly::mul(a, b) == slow);
  }
}

TEST_CASE("scaled remainder") {
  const zpoly::ZPoly q{0, -27, 4};
  const zpoly::ZPoly a{5, -3, 0, 7, 11, -2, 9};
  const Poly r = zpoly::rem(a, zpoly::to_rational(q));
  const Poly rs = zpoly::to_rational(zpoly::rem_scaled(a, q));
  CHECK(rs.monic() == r.monic());
}

TEST_CASE("gcd recovers planted common factor") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Poly g = random_poly(rng, 3, 5);
    const Poly u = random_poly(rng, 4, 5), v = random_poly(rng, 4, 5);
    const Poly a = g * u, b = g * v;
    const Poly h = Poly::gcd(a, b);
    CHECK(Poly::divmod(a, h).second.is_zero());
    CHECK(Poly::divmod(b, h).second.is_zero());
    if (!g.is_constant()) CHECK(Poly::divmod(h, g.monic()).second.is_zero());
    CHECK(h.leading() == 1);
  }
}

TEST_CASE("squarefree part and roots") {
  const Poly p = Poly{-1, 1}.pow(3) * Poly{2, 0, 1};  // (t-1)^3 (t^2+2)
  const Poly s = p.squarefree_part();
  CHECK(s == (Poly{-1, 1} * Poly{2, 0, 1}));
  const auto r = s.roots();
  REQUIRE(r.size() == 3);
  for (cplx z : r) CHECK(std::abs(s.eval(z)) < 1e-13);
}

TEST_CASE("invert variable") {
  const RatFun f = parse_ratfun("(t^2-6t+1)/(t-3)");
  const RatFun g = f.invert_variable();
  for (cplx w : {cplx(0.3, 0.1), cplx(-2, 1)}) CHECK(std::abs(g.eval(w) - f.eval(1.0 / w)) < 1e-12);
  CHECK(RatFun(Poly{0, 0, 0, 5}).invert_variable() == RatFun(5) / T().pow(3));
}

TEST_CASE("random field identities") {
  std::mt19937_64 rng(2024);
  auto rf = [&] {
    Poly d = random_poly(rng, 3, 4);
    return RatFun(random_poly(rng, 3, 4), d);
  };
  for (int trial = 0; trial < 200; ++trial) {
    const RatFun f = rf(), g = rf(), h = rf();
    CHECK((f + g) + h == f + (g + h));
    CHECK(f * (g + h) == f * g + f * h);
    CHECK((f * g).is_normalized());
    CHECK((f - g + g) == f);
    if (!g.is_zero()) CHECK((f / g) * g == f);
    CHECK((f * g).degree() <= f.degree() + g.degree());
    const cplx z(0.37, -0.81);
    try {
      CHECK(std::abs((f * g).eval(z) - f.eval(z) * g.eval(z)) <=
            1e-9 * (1 + std::abs(f.eval(z) * g.eval(z))));
    } catch (const Error&) {
    }
  }
}

TEST_CASE("degree is additive without cancellation") {
  // Distinct linear factors and poles at infinity on both sides, so nothing cancels.
  const RatFun t = T();
  const RatFun f = (t - 1) * (t - 2) / (t - 3), g = (t + 5) * (t + 11) * (t - 13) / (t - 7);
  CHECK((f * g).degree() == f.degree() + g.degree());
}
