// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "betti_heights/brody.hpp"
#include "betti_heights/error.hpp"
#include "betti_heights/forms.hpp"
#include "betti_heights/heights.hpp"

using namespace bh;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const RatFun t = RatFun::variable();

EllipticSurface flagship() { return EllipticSurface(-t, t); }
Section p11() { return Section::affine(RatFun(1), RatFun(1)); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome counterexample() {
  QuadratureOptions opts;
  opts.tol = 1e-10;
  const auto t0 = Clock::now();
  const auto rows = counterexample_sweep(6, 0.5, Schedule::Decay, opts);
  const double secs = seconds_since(t0);
  double worst = 0;
  for (const auto& r : rows) worst = std::max(worst, std::abs(r.quadrature - r.closed_form) / r.closed_form);
  const bool n1 = std::abs(rows[0].quadrature - 4 * std::numbers::pi / 5) <= 1e-6 * 4 * std::numbers::pi / 5;
  char buf[160];
  std::snprintf(buf, sizeof buf, "max rel err %.2e over n=1..6, n=1 %.12f, %.2f s", worst, rows[0].quadrature, secs);
  return {worst <= 1e-6 && n1 && secs <= 10.0, buf};
}

Outcome full_identity() {
  const auto t0 = Clock::now();
  const EllipticSurface s = flagship();
  const TateReport tate = tate_height(s, p11(), {6, 20000});
  FullHeightOptions fo;
  fo.grid_n = 256;
  const FullHeightReport full = full_height(s, p11(), fo);
  const double secs = seconds_since(t0);
  const double diff = std::abs(full.value - tate.value);
  const double bound = std::max(1e-2 * tate.value, full.error + tate.error);
  char buf[200];
  std::snprintf(buf, sizeof buf, "full %.6f +- %.1e, tate %.6f, |diff| %.2e <= %.2e, %.1f s", full.value, full.error,
                tate.value, diff, bound, secs);
  return {diff <= bound && secs <= 300.0, buf};
}

Outcome quadraticity() {
  const EllipticSurface s = flagship();
  const Section P = p11();
  bool ok = true;
  double worst = 0;  // |defect| / bound
  for (const Disc& D : {Disc{-1.0, 0.25}, Disc{cplx(2.0, 1.5), 0.5}}) {
    FieldCache cache(s);
    const HeightReport h1 = partial_height(s, P, D, {}, &cache);
    for (int m : {2, 3}) {
      const HeightReport hm = partial_height(s, section_mul(s, m, P), D, {}, &cache);
      const double defect = std::abs(hm.value - m * m * h1.value);
      const double bound = 4.0 * m * m * (hm.error + h1.error);
      ok = ok && defect <= bound;
      worst = std::max(worst, defect / bound);
    }
    const Section Q = section_mul(s, 2, P);
    const HeightReport hs = partial_height(s, section_add(s, P, Q), D, {}, &cache);
    const HeightReport hd = partial_height(s, section_add(s, P, section_neg(Q)), D, {}, &cache);
    const HeightReport hq = partial_height(s, Q, D, {}, &cache);
    const double defect = std::abs(hs.value + hd.value - 2 * h1.value - 2 * hq.value);
    const double bound = 4.0 * (hs.error + hd.error + 2 * h1.error + 2 * hq.error);
    ok = ok && defect <= bound;
    worst = std::max(worst, defect / bound);
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "m in {2,3} and parallelogram on two discs, worst defect/bound %.3f", worst);
  return {ok, buf};
}

Outcome nondegeneracy() {
  const auto rows = nondeg_ratio(flagship(), p11(), {-1.0, 0.25}, 3);
  bool ok = rows.size() == 3;
  double spread = 0;
  for (const auto& a : rows) {
    ok = ok && a.ratio >= 1e-4 && a.ratio <= 1 + 1e-3;
    for (const auto& b : rows) spread = std::max(spread, std::abs(a.ratio - b.ratio) / std::max(a.ratio, b.ratio));
  }
  ok = ok && spread <= 0.05;
  char buf[160];
  std::snprintf(buf, sizeof buf, "ratios %.6g %.6g %.6g, spread %.2e", rows[0].ratio, rows[1].ratio, rows[2].ratio,
                spread);
  return {ok, buf};
}

Outcome betti_structure() {
  double torsion_dev = 0;
  // 2-torsion sections on two surfaces.
  const std::vector<std::tuple<EllipticSurface, Section, Disc>> torsion = {
      {EllipticSurface(RatFun(1) - t * t, -t), Section::affine(t, RatFun(0)), Disc{1.0, 0.6}},
      {EllipticSurface(RatFun(-1) / t - t * t, RatFun(1)), Section::affine(t, RatFun(0)), Disc{cplx(0.3, 0.3), 0.2}},
  };
  for (const auto& [s, T, D] : torsion) {
    const LatticeField field = lattice_continue(s, D, 32);
    const BettiPath path = betti_path(s, T, field);
    for (std::size_t k = 0; k < path.beta.size(); ++k) {
      if (!field.grid.active[k]) continue;
      for (double b : path.beta[k]) torsion_dev = std::max(torsion_dev, std::abs(2 * b - std::round(2 * b)));
    }
  }

  const EllipticSurface s = flagship();
  const Section P = p11();
  double doubling_dev = 0, min_ratio = 0;
  for (const Disc& D : {Disc{-1.0, 0.25}, Disc{cplx(2.0, 1.5), 0.5}}) {
    const LatticeField field = lattice_continue(s, D, 64);
    const BettiPath b1 = betti_path(s, P, field);
    const BettiPath b2 = betti_path(s, section_mul(s, 2, P), field);
    for (std::size_t k = 0; k < b1.beta.size(); ++k) {
      if (!field.grid.active[k]) continue;
      for (int c = 0; c < 2; ++c) {
        const double d = b2.beta[k][c] - 2 * b1.beta[k][c];
        doubling_dev = std::max(doubling_dev, std::abs(d - std::round(d)));
      }
    }
    for (int m : {1, 2, 3}) {
      const DensityGrid g = betti_density(field, betti_path(s, section_mul(s, m, P), field));
      min_ratio = std::min(min_ratio, g.min_value() / g.max_value());
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "torsion half-lattice dev %.2e, 2P vs 2*P dev %.2e, min/max density %.2e",
                torsion_dev, doubling_dev, min_ratio);
  return {torsion_dev <= 1e-8 && doubling_dev <= 1e-7 && min_ratio >= -1e-9, buf};
}

Outcome tate_convergence() {
  bool ok = true;
  std::string detail;
  const std::vector<std::pair<EllipticSurface, Section>> cases = {
      {flagship(), p11()},
      {EllipticSurface(RatFun(-1) / t - t * t, RatFun(1)), Section::affine(RatFun(0), RatFun(1))},
  };
  for (const auto& [s, P] : cases) {
    const TateReport r = tate_height(s, P, {6, 20000});
    const double d = std::abs(r.estimates[6] - r.estimates[5]);
    const double bound = std::pow(4.0, -5) * static_cast<double>(r.quasi_constant);
    ok = ok && d <= bound;
    char buf[120];
    std::snprintf(buf, sizeof buf, "|h5-h6| %.2e <= %.2e (C=%ld); ", d, bound, r.quasi_constant);
    detail += buf;
  }
  const std::vector<std::pair<EllipticSurface, Section>> torsion = {
      {EllipticSurface(RatFun(1) - t * t, -t), Section::affine(t, RatFun(0))},
      {EllipticSurface(RatFun(-1) / t - t * t, RatFun(1)), Section::affine(t, RatFun(0))},
  };
  for (const auto& [s, T] : torsion)
    for (int n = 1; n <= 6; ++n) {
      const TateReport r = tate_height(s, T, {n, 20000});
      ok = ok && r.value == 0.0;
    }
  detail += "torsion exactly 0 for n=1..6";
  return {ok, detail};
}

Outcome brody_pipeline() {
  auto family = [](int n) { return ProductMap({parse_holexpr("z"), parse_holexpr("z^n", {{"n", n}})}); };
  const ZoomSequence zs = zoom_sequence(family, {0.0, 1.0}, {4, 8, 16, 32});
  bool ok = zs.valid();
  std::vector<DiscMap> psis;
  double worst_norm = 0, worst_bound = 0;
  for (const auto& st : zs.steps) {
    const Reparametrization rp = brody_reparametrize(st.map, 1.0);
    worst_norm = std::max(worst_norm, std::abs(rp.psi.derivative_norm(0.0) - 1.0));
    worst_bound = std::max(worst_bound, interior_bound(rp.psi, rp.psi.radius, 81));
    psis.push_back(rp.psi);
  }
  ok = ok && worst_norm <= 1e-3 && worst_bound <= 1.05;
  const ProbeReport rep = limit_probe(psis, 1.0, 21, 1e-2);
  const double rN = zs.steps.back().scale;
  ok = ok && rep.verticality <= 10 * rN;

  bool bounded = false;
  try {
    zoom_sequence(
        [](int n) { return ProductMap({parse_holexpr("z"), parse_holexpr("n^(-n) * z^n", {{"n", n}})}); },
        {0.0, 0.5}, {4, 8, 16, 32});
  } catch (const Error& e) {
    bounded = e.kind() == ErrorKind::NormBounded;
  }
  ok = ok && bounded;
  char buf[220];
  std::snprintf(buf, sizeof buf,
                "r_n %.3f..%.3f, r_n*norm %.2f..%.2f, max |dpsi(0)|-1| %.1e, interior %.4f, verticality %.3f <= %.3f, "
                "bounded schedule NormBounded=%s",
                zs.steps.front().scale, rN, zs.steps.front().scale * zs.steps.front().norm,
                rN * zs.steps.back().norm, worst_norm, worst_bound, rep.verticality, 10 * rN,
                bounded ? "yes" : "no");
  return {ok, buf};
}

Outcome algebra_suite() {
  std::mt19937_64 rng(20261018);
  std::uniform_int_distribution<long> coef(-9, 9), deg(0, 3), den(1, 5);
  auto rand_poly = [&] {
    std::vector<BigRational> c(deg(rng) + 1);
    for (auto& x : c) x = BigRational(coef(rng), den(rng));
    return Poly(c);
  };
  auto rand_ratfun = [&] {
    Poly d = rand_poly();
    while (d.is_zero()) d = rand_poly();
    return RatFun(rand_poly(), d);
  };
  long checked = 0, failed = 0;
  auto expect = [&](bool ok) {
    ++checked;
    if (!ok) ++failed;
  };
  while (checked < 8000) {
    const RatFun f = rand_ratfun(), g = rand_ratfun(), h = rand_ratfun();
    expect((f + g) - g == f);
    expect(f * (g + h) == f * g + f * h);
    if (!g.is_zero()) expect((f * g) / g == f);
    expect((f * h + g * h).is_normalized());
  }
  const EllipticSurface s1 = flagship(), s2(RatFun(-1) / t - t * t, RatFun(1));
  const std::vector<std::pair<const EllipticSurface*, std::vector<Section>>> groups = {
      {&s1, {p11()}},
      {&s2, {Section::affine(RatFun(0), RatFun(1)), Section::affine(t, RatFun(0))}},
  };
  std::uniform_int_distribution<long> small(-3, 3);
  for (int k = 0; checked < 10000; ++k) {
    const auto& [s, gens] = groups[k % 2];
    auto rand_section = [&, &s = *s, &gens = gens] {
      Section x = Section::zero();
      for (const auto& g : gens) x = section_add(s, x, section_mul(s, small(rng), g));
      return x;
    };
    const Section P = rand_section(), Q = rand_section(), R = rand_section();
    const long a = small(rng), b = small(rng);
    expect(section_add(*s, section_mul(*s, a, P), section_mul(*s, b, P)) == section_mul(*s, a + b, P));
    expect(section_add(*s, P, Q) == section_add(*s, Q, P));
    expect(section_add(*s, section_add(*s, P, Q), R) == section_add(*s, P, section_add(*s, Q, R)));
    expect(section_add(*s, P, section_neg(P)).is_zero());
    expect(s->contains(section_add(*s, P, Q)));
  }
  char buf[100];
  std::snprintf(buf, sizeof buf, "%ld exact identities, %ld failures", checked, failed);
  return {failed == 0 && checked >= 10000, buf};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 counterexample reproduction", counterexample},
      {"2 full-height identity", full_identity},
      {"3 quadraticity suite", quadraticity},
      {"4 non-degeneracy experiment", nondegeneracy},
      {"5 Betti structure", betti_structure},
      {"6 Tate height convergence", tate_convergence},
      {"7 Brody pipeline", brody_pipeline},
      {"8 algebra suite", algebra_suite},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-32s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
