#include <doctest.h>

#include <cmath>

#include "betti_heights/brody.hpp"
#include "betti_heights/error.hpp"

using namespace bh;

namespace {

ProductMap power_pair(int n) {
  return ProductMap({parse_holexpr("z"), parse_holexpr("z^n", {{"n", n}})});
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidArgument;
}

double rho_star(int n) { return std::pow((n - 1.0) / (n + 1.0), 1.0 / (2 * n)); }

}  // namespace

TEST_CASE("derivative norm") {
  const ProductMap id({parse_holexpr("z")});
  CHECK(derivative_norm(id, 0.0) == doctest::Approx(1.0));
  CHECK(derivative_norm(ProductMap({parse_holexpr("2"), parse_holexpr("-1/3")}), cplx(0.3, 0.1)) == 0.0);
  CHECK(kind_of([] { derivative_norm(ProductMap({parse_holexpr("1/(z-1)")}), 1.0); }) == ErrorKind::PoleAtPoint);

  for (int n : {3, 5, 8, 13}) {
    const ProductMap second({parse_holexpr("z^n", {{"n", n}})});
    auto closed = [n](double r) { return n * std::pow(r, n - 1) / (1 + std::pow(r, 2 * n)); };
    for (double r : {0.2, 0.6, 0.9}) CHECK(derivative_norm(second, std::polar(r, 0.7)) == doctest::Approx(closed(r)));
    // Grid search on [0, 1] lands on the calculus maximiser.
    double best = 0, arg = 0;
    for (int k = 0; k <= 200000; ++k) {
      const double r = k / 200000.0;
      if (closed(r) > best) best = closed(r), arg = r;
    }
    CHECK(std::abs(arg - rho_star(n)) < 2e-5);
    const auto [z, v] = grid_argmax([&](cplx t) { return derivative_norm(second, t); }, {0.0, 1.0});
    CHECK(std::abs(std::abs(z) - rho_star(n)) < 1e-3);
    CHECK(v == doctest::Approx(closed(rho_star(n))).epsilon(1e-6));
  }
}

TEST_CASE("zoom sequences") {
  const std::vector<int> ns{4, 8, 16, 32, 64};
  const ZoomSequence zs = zoom_sequence(power_pair, {0.0, 1.0}, ns);
  REQUIRE(zs.steps.size() == ns.size());
  CHECK(zs.valid());
  for (const auto& st : zs.steps) {
    const int n = st.n;
    const double r = rho_star(n);
    // full norm at rho*: both factors contribute
    const double oracle = std::sqrt(1 / std::pow(1 + r * r, 2) +
                                    std::pow(n * std::pow(r, n - 1) / (1 + std::pow(r, 2 * n)), 2));
    CHECK(st.norm == doctest::Approx(oracle).epsilon(1e-3));
    CHECK(st.norm > 0.45 * n);
    CHECK(st.scale == doctest::Approx(1 / std::sqrt(st.norm)));
    CHECK(st.map.derivative_norm(0.0) == doctest::Approx(st.scale * st.norm));
  }
  CHECK(zs.steps.back().scale < 0.2);

  // On the disc of radius 0.95 the maximiser leaves the disc for n >= 8 and
  // the norms saturate near 6.3.
  CHECK(kind_of([] { zoom_sequence(power_pair, {0.0, 0.95}, {4, 8, 16, 32}); }) == ErrorKind::NormBounded);

  auto bounded = [](int n) {
    return ProductMap({parse_holexpr("z"), parse_holexpr("n^(-n) * z^n", {{"n", n}})});
  };
  CHECK(kind_of([&] { zoom_sequence(bounded, {0.0, 0.5}, {2, 4, 8, 16, 32}); }) == ErrorKind::NormBounded);
  auto constant = [](int) { return ProductMap({parse_holexpr("3"), parse_holexpr("1/2")}); };
  CHECK(kind_of([&] { zoom_sequence(constant, {0.0, 1.0}, {1, 2, 3}); }) == ErrorKind::NormBounded);
  // The scale is capped by the distance to the doubled disc.
  ZoomOptions tight;
  tight.outer_factor = 1.05;
  const ZoomSequence capped = zoom_sequence(power_pair, {0.0, 1.0}, {4, 32}, tight);
  CHECK(capped.steps[0].scale <= 1.05 - std::abs(capped.steps[0].center) + 1e-12);
}

TEST_CASE("Brody reparametrisation") {
  const DiscMap flat{ProductMap({parse_holexpr("z"), parse_holexpr("0")}), Mobius{}, 1.0};
  const Reparametrization r0 = brody_reparametrize(flat, 1.0);
  CHECK(std::abs(r0.z0) < 1e-12);
  CHECK(r0.psi.derivative_norm(0.0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(r0.psi.chart.c) < 1e-12);  // affine

  // (z, z^8) on the unit disc: mu is radial, so a fine radial search is the oracle.
  const DiscMap p8{power_pair(8), Mobius{}, 1.0};
  auto mu = [&](double r) { return p8.derivative_norm(r) * (1 - r * r); };
  double best = 0, arg = 0;
  for (int k = 0; k <= 100000; ++k) {
    const double r = k / 100000.0;
    if (mu(r) > best) best = mu(r), arg = r;
  }
  const Reparametrization r8 = brody_reparametrize(p8, 1.0);
  CHECK(std::abs(std::abs(r8.z0) - arg) < 1e-3);
  CHECK(r8.mu_max == doctest::Approx(best).epsilon(1e-6));
  // The zoom step, not the weighted maximisation, lands on rho*.
  const auto [b8, n8] = grid_argmax([&](cplx t) { return p8.derivative_norm(t); }, {0.0, 1.0});
  CHECK(std::abs(std::abs(b8) - rho_star(8)) < 1e-3);
  CHECK(n8 > 4.0);

  // Off-centre maximiser: the second factor has its largest derivative at 3/5.
  const DiscMap shifted{ProductMap({parse_holexpr("z"), parse_holexpr("5*(z - 3/5)")}), Mobius{}, 1.0};
  for (double c : {1.0, 0.3, 2.5}) {
    const Reparametrization rp = brody_reparametrize(shifted, c);
    CHECK(std::abs(rp.psi.derivative_norm(0.0) - c) <= 1e-3 * c);
    CHECK(interior_bound(rp.psi, rp.psi.radius, 81) <= 1.05 * c);
  }
  const Reparametrization once = brody_reparametrize(shifted, 1.0);
  CHECK(std::abs(once.z0) > 0.1);
  const Reparametrization twice = brody_reparametrize(once.psi, 1.0);
  CHECK(std::abs(twice.z0) < 0.01 * once.psi.radius);
  CHECK(std::abs(twice.lambda - 1.0) < 0.01);

  const DiscMap constant{ProductMap({parse_holexpr("5")}), Mobius{}, 1.0};
  CHECK(kind_of([&] { brody_reparametrize(constant, 1.0); }) == ErrorKind::ConstantMap);
}

TEST_CASE("limit probes") {
  const DiscMap a{ProductMap({parse_holexpr("1"), parse_holexpr("2")}), Mobius{}, 3.0};
  const DiscMap b{ProductMap({parse_holexpr("-1"), parse_holexpr("2")}), Mobius{}, 3.0};
  const ProbeReport same = limit_probe({a, a, a}, 2.0, 9, 1e-9);
  CHECK(same.cauchy);
  CHECK(same.distances.back() == 0.0);
  CHECK(same.verticality == 0.0);
  const ProbeReport alt = limit_probe({a, b, a, b}, 2.0, 9, 1e-3);
  CHECK_FALSE(alt.cauchy);
  CHECK(alt.distances.back() == doctest::Approx(chordal(1.0, -1.0)));
  CHECK(chordal(1.0, -1.0) == doctest::Approx(1.0));
  CHECK(kind_of([&] { limit_probe({a, DiscMap{a.map, Mobius{}, 1.0}}, 2.0, 9, 1e-3); }) ==
        ErrorKind::ProbeRadiusTooLarge);

  // Zoom, reparametrise and probe the diverging family.
  const ZoomSequence zs = zoom_sequence(power_pair, {0.0, 1.0}, {8, 16, 32, 64});
  std::vector<DiscMap> psis;
  for (const auto& st : zs.steps) {
    const Reparametrization rp = brody_reparametrize(st.map, 1.0);
    CHECK(rp.psi.derivative_norm(0.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(interior_bound(rp.psi, 2.0, 41) <= 1.05);
    psis.push_back(rp.psi);
  }
  std::vector<double> vert;
  for (std::size_t k = 1; k <= psis.size(); ++k)
    vert.push_back(limit_probe({psis.begin(), psis.begin() + k}, 2.0, 21, 1e-2).verticality);
  for (std::size_t k = 1; k < vert.size(); ++k) CHECK(vert[k] < vert[k - 1]);
  const ProbeReport rep = limit_probe(psis, 2.0, 21, 1e-2);
  CHECK(rep.verticality <= 10 * zs.steps.back().scale);
  CHECK(rep.distances.size() == 3);
  // second factor of the last map is not constant on the probe disc
  double spread = 0;
  for (const auto& s : rep.limit_samples) spread = std::max(spread, chordal(s.coords[1], rep.limit_samples[0].coords[1]));
  CHECK(spread > 0.1);
}
