#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "betti_heights/error.hpp"
#include "betti_heights/periods.hpp"

using namespace bh;

namespace {

const RatFun t = RatFun::variable();
constexpr double kPi = std::numbers::pi;

EllipticSurface flagship() { return EllipticSurface(-t, t); }

// Composite Simpson on [0, pi/2].
template <class F>
double simpson_quarter(F f, int n = 4000) {
  const double h = (kPi / 2) / n;
  double s = f(0.0) + f(kPi / 2);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return s * h / 3.0;
}

bool is_lattice_vector(cplx v, const FiberLattice& L, double tol = 1e-8) {
  const auto c = lattice_coordinates(v, L);
  return std::abs(c[0] - std::round(c[0])) < tol && std::abs(c[1] - std::round(c[1])) < tol;
}

bool same_lattice(const FiberLattice& A, const FiberLattice& B, double tol = 1e-8) {
  return is_lattice_vector(A.w1, B, tol) && is_lattice_vector(A.w2, B, tol) && is_lattice_vector(B.w1, A, tol) &&
         is_lattice_vector(B.w2, A, tol);
}

cplx random_cplx(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng)};
}

}  // namespace

TEST_CASE("cubic roots satisfy Vieta") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const cplx a = random_cplx(rng, 3), b = random_cplx(rng, 3);
    const RootTriple e = cubic_roots(a, b);
    CHECK(std::abs(e[0] + e[1] + e[2]) < 1e-12);
    CHECK(std::abs(e[0] * e[1] + e[0] * e[2] + e[1] * e[2] - a) < 1e-11);
    CHECK(std::abs(e[0] * e[1] * e[2] + b) < 1e-11);
  }
  try {
    cubic_roots(-3.0, 2.0);  // (x-1)^2 (x+2)
    FAIL("double root not detected");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NearSingularFiber);
  }
}

TEST_CASE("AGM") {
  // agm(1, sqrt 2) = pi / lemniscate constant
  CHECK(std::abs(agm(1.0, std::sqrt(2.0)) - 1.1981402347355922074) < 1e-14);
  const cplx g = agm(cplx(1, 2), cplx(3, -1));
  CHECK(std::abs(g - agm(cplx(3, -1), cplx(1, 2))) < 1e-13);
}

TEST_CASE("real period against quadrature") {
  // y^2 = x^3 - x: the real period is 2 int_1^inf dx / sqrt(x^3 - x);
  // with x = 1 + tan^2 th the integrand becomes 2 / sqrt(1 + cos^2 th).
  const double real_period = 2.0 * simpson_quarter([](double th) { return 2.0 / std::sqrt(1 + std::cos(th) * std::cos(th)); });
  const FiberLattice L = lattice_from_coefficients(-1.0, 0.0);
  CHECK(is_lattice_vector(real_period, L, 1e-9));
  // Square lattice: the shortest vector has the real period's length.
  const auto [v1, v2] = reduce_basis(L.w1, L.w2);
  CHECK(std::abs(std::abs(v1) - real_period) < 1e-9);
  CHECK(std::abs(std::abs(v2) - real_period) < 1e-9);

  // Flagship fiber at t = -1: y^2 = x^3 + x - 1 has one real root r; the real
  // period is 2 int_r^inf dx/y.
  const RootTriple e = cubic_roots(1.0, -1.0);
  double r = 0;
  for (auto z : e)
    if (std::abs(z.imag()) < 1e-12) r = z.real();
  const double q = 3 * r * r + 1;  // x = r + s^2: x^3 + x - 1 = s^2 (s^4 + 3 r s^2 + q)
  const double per = 2.0 * simpson_quarter([&](double th) {
    const double sn = std::sin(th), cs = std::cos(th);
    return 2.0 / std::sqrt(sn * sn * sn * sn + 3 * r * sn * sn * cs * cs + q * cs * cs * cs * cs);
  });
  const FiberLattice M = fiber_periods(flagship(), -1.0);
  CHECK(is_lattice_vector(per, M, 1e-9));
  CHECK(M.covolume() > 0);
}

TEST_CASE("period bases reproduce the curve invariants") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 300; ++k) {
    const cplx a = random_cplx(rng, 4), b = random_cplx(rng, 4);
    FiberLattice L;
    try {
      L = lattice_from_coefficients(a, b);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NearSingularFiber);
      continue;
    }
    CHECK(L.covolume() > 0);
    const Invariants inv = lattice_invariants(L.w1, L.w2);
    CHECK(std::abs(inv.g2 + a / 4.0) < 1e-9 * (1 + std::abs(a)));
    CHECK(std::abs(inv.g3 + b / 16.0) < 1e-9 * (1 + std::abs(b)));
  }
}

TEST_CASE("weierstrass p: differential equation and Laurent expansion") {
  std::mt19937_64 rng(3);
  const FiberLattice L = lattice_from_coefficients(cplx(0.3, -1.2), cplx(2.0, 0.5));
  const Invariants inv = lattice_invariants(L.w1, L.w2);
  for (int k = 0; k < 100; ++k) {
    const cplx z = random_cplx(rng, 3);
    const PValue v = weierstrass_p(z, L.w1, L.w2);
    const cplx lhs = v.dp * v.dp, rhs = 4.0 * v.p * v.p * v.p - inv.g2 * v.p - inv.g3;
    CHECK(std::abs(lhs - rhs) < 1e-8 * (1 + std::abs(lhs)));
    // Periodicity.
    const PValue w = weierstrass_p(z + 2.0 * L.w1 - L.w2, L.w1, L.w2);
    CHECK(std::abs(w.p - v.p) < 1e-9 * (1 + std::abs(v.p)));
  }
  const cplx z(0.013, 0.007);
  const cplx z2 = z * z;
  const cplx laurent = 1.0 / z2 + inv.g2 * z2 / 20.0 + inv.g3 * z2 * z2 / 28.0;
  CHECK(std::abs(weierstrass_p(z, L.w1, L.w2).p - laurent) < 1e-9);
}

TEST_CASE("half periods map to the two-torsion roots") {
  const cplx a(1.5, 0.4), b(-0.7, 2.0);
  const FiberLattice L = lattice_from_coefficients(a, b);
  const RootTriple e = cubic_roots(a, b);
  std::vector<int> hit(3, 0);
  for (cplx hp : {L.w1 / 2.0, L.w2 / 2.0, (L.w1 + L.w2) / 2.0}) {
    const auto [x, y] = point_from_log(hp, L);
    CHECK(std::abs(y) < 1e-7);
    for (int i = 0; i < 3; ++i)
      if (std::abs(x - e[static_cast<std::size_t>(i)]) < 1e-9) ++hit[static_cast<std::size_t>(i)];
  }
  CHECK(hit == std::vector<int>{1, 1, 1});
}

TEST_CASE("elliptic log round trip and additivity") {
  std::mt19937_64 rng(11);
  int done = 0;
  for (int k = 0; k < 200; ++k) {
    const cplx a = random_cplx(rng, 2), b = random_cplx(rng, 2);
    FiberLattice L;
    try {
      L = lattice_from_coefficients(a, b);
    } catch (const Error&) {
      continue;
    }
    const cplx z1 = reduce_mod_lattice(random_cplx(rng, 4), L);
    const cplx z2 = reduce_mod_lattice(random_cplx(rng, 4), L);
    if (std::abs(z1) < 1e-3 || std::abs(z2) < 1e-3) continue;
    const auto [x1, y1] = point_from_log(z1, L);
    const auto [x2, y2] = point_from_log(z2, L);
    CHECK(is_lattice_vector(elliptic_log(a, b, x1, y1, L) - z1, L, 1e-7));
    // Chord through the two points, third intersection negated.
    if (std::abs(x1 - x2) < 1e-3) continue;
    const cplx lam = (y2 - y1) / (x2 - x1);
    const cplx x3 = lam * lam - x1 - x2;
    const cplx y3 = -(y1 + lam * (x3 - x1));
    if (std::abs(x3) > 1e6) continue;
    const cplx z3 = elliptic_log(a, b, x3, y3, L);
    CHECK(is_lattice_vector(z3 - z1 - z2, L, 1e-6));
    ++done;
  }
  CHECK(done > 100);
}

TEST_CASE("elliptic log rejects points near the identity") {
  const FiberLattice L = lattice_from_coefficients(-1.0, 0.0);
  const cplx z(1e-9, 0.0);
  const auto [x, y] = point_from_log(z, L);
  try {
    elliptic_log(-1.0, 0.0, x, y, L);
    FAIL("expected PointNearIdentity");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PointNearIdentity);
  }
}

TEST_CASE("grid weights") {
  const Grid g = make_grid({cplx(0.5, -1.0), 1.3}, 40);
  double area = 0.0;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const double w = g.cell_weight(i, j);
      CHECK(w >= 0.0);
      CHECK(w <= g.h * g.h + 1e-15);
      if (w > 0) CHECK(g.is_active(i, j));
      area += w;
    }
  CHECK(std::abs(area - kPi * 1.3 * 1.3) < 1e-12);
  CHECK_THROWS_AS(make_grid({0.0, 1.0}, 4), Error);
}

TEST_CASE("continuation on a constant family is trivial") {
  const EllipticSurface s(RatFun(-1), RatFun(0));
  const LatticeField F = lattice_continue(s, {cplx(0.2, 0.1), 1.0}, 16);
  for (std::size_t k = 0; k < F.grid.size(); ++k) {
    if (!F.grid.active[k]) continue;
    CHECK(std::abs(F.lattices[k].w1 - F.center.w1) < 1e-12);
    CHECK(std::abs(F.lattices[k].w2 - F.center.w2) < 1e-12);
  }
}

TEST_CASE("continuation: sub-chart and fresh-lattice consistency") {
  const EllipticSurface s = flagship();
  const LatticeField big = lattice_continue(s, {3.0, 2.0}, 32);
  const LatticeField small = lattice_continue(s, {3.0, 1.0}, 16);
  // Nodes of the small grid coincide with the big grid shifted by 8.
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) {
      if (!small.grid.is_active(i, j) || !big.grid.is_active(i + 8, j + 8)) continue;
      const FiberLattice& A = small.lattices[small.grid.index(i, j)];
      const FiberLattice& B = big.lattices[big.grid.index(i + 8, j + 8)];
      CHECK(std::abs(A.t - B.t) < 1e-14);
      CHECK(std::abs(A.w1 - B.w1) < 1e-10);
      CHECK(std::abs(A.w2 - B.w2) < 1e-10);
    }
  for (std::size_t k = 0; k < big.grid.size(); ++k) {
    if (!big.grid.active[k]) continue;
    const FiberLattice& L = big.lattices[k];
    CHECK(L.covolume() > 0);
    CHECK(same_lattice(L, fiber_periods(s, L.t)));
  }
  try {
    lattice_continue(s, {6.0, 1.0}, 16);
    FAIL("expected ChartHitsBadFiber");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ChartHitsBadFiber);
  }
}

TEST_CASE("transport around loops") {
  const EllipticSurface s = flagship();
  auto circle = [](cplx c, double r, int n) {
    std::vector<cplx> pts;
    for (int k = 0; k <= n; ++k) pts.push_back(c + std::polar(r, 2 * kPi * k / n));
    return pts;
  };
  // No bad fiber inside: the basis returns to itself.
  const auto loop = circle(3.0, 1.5, 64);
  const FiberLattice start = fiber_periods(s, loop.front());
  const FiberLattice end = transport_basis(s, loop, start);
  CHECK(std::abs(end.w1 - start.w1) < 1e-9);
  CHECK(std::abs(end.w2 - start.w2) < 1e-9);

  // Around the fiber at 27/4 (type I1) the monodromy is unipotent and non-trivial.
  const auto around = circle(6.75, 0.5, 128);
  const FiberLattice s0 = fiber_periods(s, around.front());
  const FiberLattice s1 = transport_basis(s, around, s0);
  CHECK(same_lattice(s0, s1));
  const auto c1 = lattice_coordinates(s1.w1, s0), c2 = lattice_coordinates(s1.w2, s0);
  const double m11 = std::round(c1[0]), m12 = std::round(c1[1]), m21 = std::round(c2[0]), m22 = std::round(c2[1]);
  CHECK(m11 * m22 - m12 * m21 == 1.0);
  CHECK(m11 + m22 == 2.0);
  CHECK((m12 != 0.0 || m21 != 0.0));
}

TEST_CASE("betti path of sections") {
  const EllipticSurface s = flagship();
  const LatticeField F = lattice_continue(s, {3.0, 2.0}, 32);
  const Section P = Section::affine(RatFun(1), RatFun(1));
  const BettiPath bp = betti_path(s, P, F);
  const BettiPath b2 = betti_path(s, section_mul(s, 2, P), F);
  const BettiPath bm = betti_path(s, section_neg(P), F);
  std::optional<std::array<double, 2>> offset2, offsetm;
  for (std::size_t k = 0; k < F.grid.size(); ++k) {
    if (!F.grid.active[k]) continue;
    const FiberLattice& L = F.lattices[k];
    // Independent recomputation: fresh log at this fiber.
    const cplx z = elliptic_log(s, L.t, {1.0, 1.0}, L);
    const auto c = lattice_coordinates(z, L);
    for (int i = 0; i < 2; ++i) {
      const double d = c[static_cast<std::size_t>(i)] - bp.beta[k][static_cast<std::size_t>(i)];
      CHECK(std::abs(d - std::round(d)) < 1e-8);
    }
    // 2P and -P: integer offsets that stay constant over the chart.
    std::array<double, 2> o2{}, om{};
    for (std::size_t i = 0; i < 2; ++i) {
      o2[i] = b2.beta[k][i] - 2 * bp.beta[k][i];
      om[i] = bm.beta[k][i] + bp.beta[k][i];
      CHECK(std::abs(o2[i] - std::round(o2[i])) < 1e-7);
      CHECK(std::abs(om[i] - std::round(om[i])) < 1e-7);
    }
    if (!offset2) offset2 = o2, offsetm = om;
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::abs(o2[i] - (*offset2)[i]) < 1e-6);
      CHECK(std::abs(om[i] - (*offsetm)[i]) < 1e-6);
    }
  }
  CHECK(betti_path(s, Section::zero(), F).zero);
}

TEST_CASE("betti path of a torsion section is constant") {
  const EllipticSurface s(RatFun(1) - t * t, -t);
  const Section T = Section::affine(t, RatFun(0));
  const LatticeField F = lattice_continue(s, {1.0, 0.6}, 24);
  const BettiPath bp = betti_path(s, T, F);
  const auto& b0 = bp.beta[F.order.front()];
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(2 * b0[i] - std::round(2 * b0[i])) < 1e-8);
  for (int k : F.order)
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(bp.beta[static_cast<std::size_t>(k)][i] - b0[i]) < 1e-8);
}

TEST_CASE("sections with poles on the chart are rejected") {
  const EllipticSurface s = flagship();
  const Section P = Section::affine(RatFun(1), RatFun(1));
  const Section Q = section_mul(s, 3, P);
  const auto poles = section_poles_in(Q, {0.0, 100.0});
  REQUIRE(!poles.empty());
  const cplx p0 = poles.front();
  // A chart around a pole, kept clear of bad fibers when possible.
  bool tested = false;
  for (const auto& f : s.bad_fibers())
    if (std::abs(f.t - p0) < 0.2) tested = true;
  if (!tested) {
    const LatticeField F = lattice_continue(s, {p0, 0.1}, 16);
    try {
      betti_path(s, Q, F);
      FAIL("expected SectionHitsIdentity");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SectionHitsIdentity);
    }
  }
}
