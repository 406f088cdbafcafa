#include "betti_heights/periods.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "betti_heights/error.hpp"
#include "betti_heights/parallel.hpp"

namespace bh {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

double coefficient_scale(cplx a, cplx b) {
  return std::max({std::sqrt(std::abs(a)), std::cbrt(std::abs(b)), 1e-300});
}

}  // namespace

RootTriple cubic_roots(cplx a, cplx b) {
  const double scale = coefficient_scale(a, b);
  // Cardano with the cancellation-free choice of square root.
  const cplx disc = std::sqrt(b * b / 4.0 + a * a * a / 27.0);
  cplx c = -b / 2.0 + disc;
  if (std::abs(-b / 2.0 - disc) > std::abs(c)) c = -b / 2.0 - disc;
  RootTriple e{};
  if (std::abs(c) <= 1e-300) {
    e = {0.0, 0.0, 0.0};
  } else {
    const cplx u = std::pow(c, 1.0 / 3.0);
    const cplx w = std::polar(1.0, 2.0 * kPi / 3.0);
    cplx uk = u;
    for (int k = 0; k < 3; ++k) {
      e[static_cast<std::size_t>(k)] = uk - a / (3.0 * uk);
      uk *= w;
    }
  }
  for (auto& r : e) {
    for (int it = 0; it < 8; ++it) {
      const cplx f = (r * r + a) * r + b;
      const cplx df = 3.0 * r * r + a;
      if (std::abs(df) == 0.0) break;
      const cplx step = f / df;
      r -= step;
      if (std::abs(step) <= 1e-17 * scale) break;
    }
  }
  const double sep = std::min({std::abs(e[0] - e[1]), std::abs(e[0] - e[2]), std::abs(e[1] - e[2])});
  if (!(sep >= 1e-8 * scale))
    throw Error(ErrorKind::NearSingularFiber, "fiber roots collide (separation " + std::to_string(sep) + ")");
  return e;
}

RootTriple fiber_roots(const EllipticSurface& s, cplx t, Precision precision) {
  return cubic_roots(s.a_numeric()(t, precision), s.b_numeric()(t, precision));
}

cplx agm(cplx a, cplx b) {
  for (int it = 0; it < 200; ++it) {
    if (std::abs(a - b) <= 1e-15 * std::abs(a)) return a;
    const cplx a1 = 0.5 * (a + b);
    cplx b1 = std::sqrt(a * b);
    if (std::abs(a1 - b1) > std::abs(a1 + b1)) b1 = -b1;
    a = a1;
    b = b1;
  }
  throw Error(ErrorKind::AGMNonConvergence, "complex AGM did not converge in 200 iterations");
}

std::pair<cplx, cplx> reduce_basis(cplx w1, cplx w2) {
  if ((std::conj(w1) * w2).imag() < 0) w2 = -w2;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(w2) < std::abs(w1)) {
      const cplx t = w1;
      w1 = w2;
      w2 = -t;
    }
    const double mu = (w2 * std::conj(w1)).real() / std::norm(w1);
    const double m = std::round(mu);
    if (m == 0.0) break;
    w2 -= m * w1;
  }
  return {w1, w2};
}

namespace {

// Divisor sums for the Eisenstein q-expansions.
struct SigmaTable {
  std::array<double, 64> s3{}, s5{};
  SigmaTable() {
    for (int n = 1; n < 64; ++n)
      for (int d = 1; d <= n; ++d)
        if (n % d == 0) {
          s3[static_cast<std::size_t>(n)] += std::pow(d, 3);
          s5[static_cast<std::size_t>(n)] += std::pow(d, 5);
        }
  }
};

const SigmaTable& sigma_table() {
  static const SigmaTable table;
  return table;
}

// Cached data for evaluating P on one lattice.
class PEvaluator {
 public:
  PEvaluator(cplx w1, cplx w2) {
    std::tie(w1_, w2_) = reduce_basis(w1, w2);
    tau_ = w2_ / w1_;
    const double im = tau_.imag();
    terms_ = static_cast<int>(std::ceil(0.5 + 40.0 / (2.0 * kPi * im))) + 1;
    terms_ = std::clamp(terms_, 2, 40);
    cst_ = 1.0 / 3.0;
    for (int n = 1; n <= terms_; ++n) {
      const cplx sn = std::sin(kPi * static_cast<double>(n) * tau_);
      cst_ += 2.0 / (sn * sn);
    }
    k_ = kPi / w1_;
  }

  PValue operator()(cplx z) const {
    cplx u = z / w1_;
    const double bshift = std::round(u.imag() / tau_.imag());
    u -= bshift * tau_;
    u -= std::round(u.real());
    cplx s = 0.0, ds = 0.0;
    for (int n = -terms_; n <= terms_; ++n) {
      const cplx v = kPi * (u + static_cast<double>(n) * tau_);
      const cplx sn = std::sin(v), cs = std::cos(v);
      const cplx inv = 1.0 / sn;
      const cplx inv2 = inv * inv;
      s += inv2;
      ds += -2.0 * cs * inv2 * inv;
    }
    const cplx k2 = k_ * k_;
    return {k2 * (s - cst_), k2 * k_ * ds};
  }

  cplx w1() const { return w1_; }

 private:
  cplx w1_, w2_, tau_, cst_, k_;
  int terms_ = 0;
};

}  // namespace

Invariants lattice_invariants(cplx w1, cplx w2) {
  std::tie(w1, w2) = reduce_basis(w1, w2);
  const cplx q = std::exp(2.0 * kPi * kI * (w2 / w1));
  const auto& sig = sigma_table();
  cplx e4 = 1.0, e6 = 1.0, qn = 1.0;
  for (std::size_t n = 1; n < 64; ++n) {
    qn *= q;
    const cplx t4 = 240.0 * sig.s3[n] * qn, t6 = 504.0 * sig.s5[n] * qn;
    e4 += t4;
    e6 -= t6;
    if (std::abs(t6) < 1e-18) break;
  }
  const cplx c = 2.0 * kPi / w1;
  const cplx c2 = c * c, c4 = c2 * c2;
  return {c4 * e4 / 12.0, c4 * c2 * e6 / 216.0};
}

PValue weierstrass_p(cplx z, cplx w1, cplx w2) { return PEvaluator(w1, w2)(z); }

std::pair<cplx, cplx> point_from_log(cplx z, const FiberLattice& lattice) {
  const PValue v = weierstrass_p(z, lattice.w1, lattice.w2);
  return {4.0 * v.p, 4.0 * v.dp};
}

std::array<double, 2> lattice_coordinates(cplx z, const FiberLattice& L) {
  const double det = L.covolume();
  // [Re w1 Re w2; Im w1 Im w2] beta = [Re z; Im z]
  const double b1 = (z.real() * L.w2.imag() - z.imag() * L.w2.real()) / det;
  const double b2 = (L.w1.real() * z.imag() - L.w1.imag() * z.real()) / det;
  return {b1, b2};
}

cplx reduce_mod_lattice(cplx z, const FiberLattice& L) {
  auto beta = lattice_coordinates(z, L);
  const double m1 = std::floor(beta[0] + 0.5), m2 = std::floor(beta[1] + 0.5);
  return z - m1 * L.w1 - m2 * L.w2;
}

namespace {

FiberLattice lattice_for_ordering(cplx e1, cplx e2, cplx e3, cplx t) {
  const cplx w1 = 2.0 * kPi / agm(std::sqrt(e1 - e3), std::sqrt(e1 - e2));
  cplx w2 = 2.0 * kPi * kI / agm(std::sqrt(e1 - e3), std::sqrt(e2 - e3));
  if ((w2 / w1).imag() < 0) w2 = -w2;
  return {t, w1, w2};
}

bool invariants_match(const FiberLattice& L, cplx a, cplx b) {
  const Invariants inv = lattice_invariants(L.w1, L.w2);
  const double s = coefficient_scale(a, b);
  return std::abs(inv.g2 + a / 4.0) <= 1e-8 * s * s && std::abs(inv.g3 + b / 16.0) <= 1e-8 * s * s * s;
}

// (e1, e2) is the closest pair.
RootTriple nearest_pair_first(const RootTriple& e) {
  const double d01 = std::abs(e[0] - e[1]), d02 = std::abs(e[0] - e[2]), d12 = std::abs(e[1] - e[2]);
  if (d01 <= d02 && d01 <= d12) return {e[0], e[1], e[2]};
  if (d02 <= d12) return {e[0], e[2], e[1]};
  return {e[1], e[2], e[0]};
}

}  // namespace

FiberLattice lattice_from_coefficients(cplx a, cplx b, cplx t) {
  const RootTriple e = nearest_pair_first(cubic_roots(a, b));
  FiberLattice L = lattice_for_ordering(e[0], e[1], e[2], t);
  if (invariants_match(L, a, b)) return L;
  // The optimal-branch formulas give a basis for every ordering in practice;
  // keep the others as a fallback.
  static constexpr int perms[5][3] = {{0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& p : perms) {
    L = lattice_for_ordering(e[static_cast<std::size_t>(p[0])], e[static_cast<std::size_t>(p[1])],
                             e[static_cast<std::size_t>(p[2])], t);
    if (invariants_match(L, a, b)) return L;
  }
  throw Error(ErrorKind::AGMNonConvergence, "no AGM period basis reproduces the fiber invariants");
}

FiberLattice fiber_periods(const EllipticSurface& s, cplx t, Precision precision) {
  return lattice_from_coefficients(s.a_numeric()(t, precision), s.b_numeric()(t, precision), t);
}

namespace {

// Descending Landen / AGM estimate of the log, up to sign.
cplx landen_log(cplx a, cplx b, cplx x) {
  const RootTriple e = nearest_pair_first(cubic_roots(a, b));
  cplx A = std::sqrt(e[0] - e[2]), B = std::sqrt(e[0] - e[1]), C = std::sqrt(x - e[2]);
  for (int it = 0; it < 60; ++it) {
    const cplx A1 = 0.5 * (A + B);
    cplx B1 = std::sqrt(A * B);
    if (std::abs(A1 - B1) > std::abs(A1 + B1)) B1 = -B1;
    cplx R = std::sqrt(C * C - A * A + B * B);
    if (std::abs(C - R) > std::abs(C + R)) R = -R;
    C = 0.5 * (C + R);
    A = A1;
    B = B1;
    if (std::abs(A - B) <= 1e-15 * std::abs(A)) break;
  }
  // log for dX/Y with Y = 2y is asin(A/C)/A; ours is twice that.
  return 2.0 * std::asin(A / C) / A;
}

struct LogResult {
  cplx z;
  bool ok;
};

LogResult newton_log(const PEvaluator& P, cplx a, cplx x, cplx y, cplx z, int max_iter) {
  const double xs = 1.0 + std::abs(x);
  for (int it = 0; it < max_iter; ++it) {
    const PValue v = P(z);
    const cplx X = 4.0 * v.p, Y = 4.0 * v.dp;
    const cplx r = X - x;
    if (std::abs(r) <= 1e-13 * xs) break;
    // Second-order step: near two-torsion Y vanishes and plain Newton
    // loses half the digits. X'' = 3/2 X^2 + a/2 in our normalisation.
    const cplx X2 = 1.5 * X * X + 0.5 * a;
    cplx root = std::sqrt(Y * Y - 2.0 * X2 * r);
    if (std::abs(Y - root) > std::abs(Y + root)) root = -root;
    const cplx den = Y + root;
    if (std::abs(den) == 0.0) break;
    z -= 2.0 * r / den;
  }
  {
    const PValue v = P(z);
    if (std::abs(4.0 * v.dp + y) < std::abs(4.0 * v.dp - y)) z = -z;
  }
  // Near two-torsion x determines z only to sqrt(eps); y is well conditioned
  // there, so finish with Newton on Y(z) = y.
  for (int it = 0; it < 4; ++it) {
    const PValue v = P(z);
    const cplx X = 4.0 * v.p, Y = 4.0 * v.dp;
    const cplx X2 = 1.5 * X * X + 0.5 * a;
    if (!(std::norm(Y) < 1e-4 * std::abs(X2) * xs)) break;
    z -= (Y - y) / X2;
  }
  const PValue v = P(z);
  const cplx X = 4.0 * v.p, Y = 4.0 * v.dp;
  const bool ok = std::abs(X - x) <= 1e-9 * xs && std::abs(std::abs(Y) - std::abs(y)) <= 1e-6 * (1.0 + std::abs(y));
  return {z, ok && std::isfinite(z.real()) && std::isfinite(z.imag())};
}

}  // namespace

cplx elliptic_log(cplx a, cplx b, cplx x, cplx y, const FiberLattice& lattice, std::optional<cplx> guess) {
  const double mesh = std::min(std::abs(lattice.w1), std::abs(lattice.w2));
  if (!std::isfinite(x.real()) || !std::isfinite(x.imag()) || std::abs(x) * mesh * mesh > 4e16)
    throw Error(ErrorKind::PointNearIdentity, "point too close to the identity for a stable log");
  const PEvaluator P(lattice.w1, lattice.w2);
  if (guess) {
    const LogResult r = newton_log(P, a, x, y, *guess, 8);
    if (r.ok) return reduce_mod_lattice(r.z, lattice);
  }
  LogResult r = newton_log(P, a, x, y, landen_log(a, b, x), 12);
  if (!r.ok) {
    // Multi-start fallback over the fundamental parallelogram.
    for (int i = 0; i < 4 && !r.ok; ++i)
      for (int j = 0; j < 4 && !r.ok; ++j) {
        const cplx z0 = ((i + 0.5) / 4.0 - 0.5) * lattice.w1 + ((j + 0.5) / 4.0 - 0.5) * lattice.w2;
        r = newton_log(P, a, x, y, z0, 40);
      }
  }
  if (!r.ok) throw Error(ErrorKind::AGMNonConvergence, "elliptic logarithm failed to converge");
  const cplx z = reduce_mod_lattice(r.z, lattice);
  if (std::abs(z) < 1e-8 * mesh)
    throw Error(ErrorKind::PointNearIdentity, "log lies within 1e-8 of a lattice point");
  return z;
}

cplx elliptic_log(const EllipticSurface& s, cplx t, std::pair<cplx, cplx> point, const FiberLattice& lattice) {
  const cplx a = s.a_numeric()(t), b = s.b_numeric()(t);
  const cplx x = point.first, y = point.second;
  const double scale = coefficient_scale(a, b);
  const double res = std::abs(y * y - ((x * x + a) * x + b));
  if (res > 1e-10 * std::max({1.0, std::pow(std::abs(x), 3.0), std::pow(scale, 6.0)}))
    throw Error(ErrorKind::InvalidArgument, "point is not on the fiber");
  return elliptic_log(a, b, x, y, lattice);
}

FiberLattice align_basis(const FiberLattice& fresh, cplx ref1, cplx ref2) {
  const auto [v1, v2] = reduce_basis(fresh.w1, fresh.w2);
  const FiberLattice red{fresh.t, v1, v2};
  const auto c1 = lattice_coordinates(ref1, red), c2 = lattice_coordinates(ref2, red);
  const double m11 = std::round(c1[0]), m12 = std::round(c1[1]);
  const double m21 = std::round(c2[0]), m22 = std::round(c2[1]);
  const cplx n1 = m11 * v1 + m12 * v2, n2 = m21 * v1 + m22 * v2;
  const double mesh = std::abs(v1);
  const double dist = std::max(std::abs(n1 - ref1), std::abs(n2 - ref2));
  if (m11 * m22 - m12 * m21 != 1.0 || !(dist < 0.5 * mesh))
    throw Error(ErrorKind::ContinuationAmbiguity,
                "no unimodular basis within half the lattice mesh (grid too coarse?)");
  return {fresh.t, n1, n2};
}

// ---------------------------------------------------------------- grids

// Integral over [x0, x1] of the vertical extent of [y0, y1] inside the disc.
double rect_disc_area(double x0, double x1, double y0, double y1, const Disc& disc) {
  const double cx = disc.center.real(), cy = disc.center.imag(), R = disc.radius;
  const double fx = std::max(std::abs(x0 - cx), std::abs(x1 - cx));
  const double fy = std::max(std::abs(y0 - cy), std::abs(y1 - cy));
  if (fx * fx + fy * fy <= R * R) return (x1 - x0) * (y1 - y0);
  const double nx = std::max({0.0, x0 - cx, cx - x1});
  const double ny = std::max({0.0, y0 - cy, cy - y1});
  if (nx * nx + ny * ny >= R * R) return 0.0;
  std::vector<double> cuts{x0, x1};
  auto add = [&](double x) {
    if (x > x0 && x < x1) cuts.push_back(x);
  };
  add(cx - R);
  add(cx + R);
  for (double y : {y0, y1}) {
    const double d = y - cy;
    if (std::abs(d) < R) {
      const double s = std::sqrt((R - d) * (R + d));
      add(cx - s);
      add(cx + s);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  // Antiderivative of sqrt(R^2 - u^2).
  auto S = [R](double u) {
    u = std::clamp(u, -R, R);
    const double c = std::sqrt((R - u) * (R + u));
    return 0.5 * (u * c + R * R * std::atan2(u, c));
  };
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (b <= a) continue;
    const double m = 0.5 * (a + b) - cx;
    if (std::abs(m) >= R) continue;
    const double sm = std::sqrt((R - m) * (R + m));
    const bool upper_clip = cy + sm > y1, lower_clip = cy - sm < y0;
    const double up = upper_clip ? y1 : cy + sm, lo = lower_clip ? y0 : cy - sm;
    if (up <= lo) continue;
    const double arc = S(b - cx) - S(a - cx);
    const double iu = upper_clip ? y1 * (b - a) : cy * (b - a) + arc;
    const double il = lower_clip ? y0 * (b - a) : cy * (b - a) - arc;
    area += iu - il;
  }
  return std::max(0.0, area);
}

double Grid::cell_weight(int i, int j) const {
  const cplx c = node(i, j);
  return rect_disc_area(c.real() - 0.5 * h, c.real() + 0.5 * h, c.imag() - 0.5 * h, c.imag() + 0.5 * h, disc);
}

Grid make_grid(const Disc& disc, int n) {
  if (!(disc.radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "disc radius must be positive");
  if (n < 8) throw Error(ErrorKind::InvalidArgument, "grid size must be at least 8");
  Grid g;
  g.disc = disc;
  g.n = n;
  g.h = 2.0 * disc.radius / n;
  g.active.assign(g.size(), 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      g.active[g.index(i, j)] = std::abs(g.node(i, j) - disc.center) <= disc.radius + 3.0 * g.h;
  return g;
}

// ---------------------------------------------------------------- continuation

namespace {

void check_chart(const EllipticSurface& s, const Disc& chart) {
  for (const auto& f : s.bad_fibers())
    if (chart.contains(f.t))
      throw Error(ErrorKind::ChartHitsBadFiber, "bad fiber at t = (" + std::to_string(f.t.real()) + ", " +
                                                    std::to_string(f.t.imag()) + ") lies in the chart");
}

// BFS over active nodes from the node nearest the chart centre.
void bfs_order(const Grid& g, std::vector<int>& order, std::vector<int>& parent) {
  const int n = g.n;
  parent.assign(g.size(), -2);
  order.clear();
  const int c = n / 2;
  int start = static_cast<int>(g.index(c, c));
  if (!g.active[static_cast<std::size_t>(start)]) throw Error(ErrorKind::InvalidArgument, "inactive centre node");
  std::deque<int> queue{start};
  parent[static_cast<std::size_t>(start)] = -1;
  while (!queue.empty()) {
    const int k = queue.front();
    queue.pop_front();
    order.push_back(k);
    const int i = k % n, j = k / n;
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      const int ii = i + di[d], jj = j + dj[d];
      if (!g.is_active(ii, jj)) continue;
      const int kk = static_cast<int>(g.index(ii, jj));
      if (parent[static_cast<std::size_t>(kk)] != -2) continue;
      parent[static_cast<std::size_t>(kk)] = k;
      queue.push_back(kk);
    }
  }
}

}  // namespace

LatticeField lattice_continue(const EllipticSurface& s, const Disc& chart, int grid_n, Precision precision) {
  check_chart(s, chart);
  LatticeField F;
  F.surface = &s;
  F.precision = precision;
  F.grid = make_grid(chart, grid_n);
  const Grid& g = F.grid;
  F.center = fiber_periods(s, chart.center, precision);
  F.lattices.assign(g.size(), FiberLattice{});
  F.a_values.assign(g.size(), 0.0);
  F.b_values.assign(g.size(), 0.0);

  // Fresh lattices are independent per node.
  std::vector<FiberLattice> fresh(g.size());
  parallel_for(g.size(), [&](std::size_t k) {
    if (!g.active[k]) return;
    const int i = static_cast<int>(k) % g.n, j = static_cast<int>(k) / g.n;
    const cplx t = g.node(i, j);
    const cplx a = s.a_numeric()(t, precision), b = s.b_numeric()(t, precision);
    F.a_values[k] = a;
    F.b_values[k] = b;
    fresh[k] = lattice_from_coefficients(a, b, t);
  });

  bfs_order(g, F.order, F.parent);
  for (int k : F.order) {
    const auto uk = static_cast<std::size_t>(k);
    const int p = F.parent[uk];
    const FiberLattice& ref = p < 0 ? F.center : F.lattices[static_cast<std::size_t>(p)];
    F.lattices[uk] = align_basis(fresh[uk], ref.w1, ref.w2);
  }
  // Continuity certificate against every active neighbour, not only the parent.
  for (int k : F.order) {
    const int i = k % g.n, j = k / g.n;
    const FiberLattice& L = F.lattices[static_cast<std::size_t>(k)];
    for (auto [ii, jj] : {std::pair{i + 1, j}, std::pair{i, j + 1}}) {
      if (!g.is_active(ii, jj)) continue;
      const FiberLattice& M = F.lattices[g.index(ii, jj)];
      const double mesh = std::min(std::abs(L.w1), std::abs(L.w2));
      if (std::max(std::abs(L.w1 - M.w1), std::abs(L.w2 - M.w2)) >= 0.5 * mesh)
        throw Error(ErrorKind::ContinuationAmbiguity, "neighbouring period bases disagree");
    }
  }
  return F;
}

std::vector<cplx> section_poles_in(const Section& p, const Disc& disc, double slack) {
  std::vector<cplx> out;
  if (p.is_zero()) return out;
  for (cplx r : p.x().den().roots())
    if (disc.contains(r, slack)) out.push_back(r);
  return out;
}

BettiPath betti_path(const EllipticSurface&, const Section& p, const LatticeField& F) {
  const Grid& g = F.grid;
  BettiPath path;
  path.beta.assign(g.size(), {0.0, 0.0});
  path.z.assign(g.size(), 0.0);
  if (p.is_zero()) {
    path.zero = true;
    return path;
  }
  if (!section_poles_in(p, g.disc, 3.0 * g.h * std::sqrt(2.0)).empty())
    throw Error(ErrorKind::SectionHitsIdentity, "x(P) has a pole on the chart");

  const NumericRatFun xf(p.x()), yf(p.y());
  std::vector<std::array<double, 2>> raw(g.size());
  parallel_for(g.size(), [&](std::size_t k) {
    if (!g.active[k]) return;
    const cplx t = F.lattices[k].t;
    const cplx x = xf(t, F.precision), y = yf(t, F.precision);
    const cplx z = elliptic_log(F.a_values[k], F.b_values[k], x, y, F.lattices[k]);
    path.z[k] = z;
    raw[k] = lattice_coordinates(z, F.lattices[k]);
  });

  for (int k : F.order) {
    const auto uk = static_cast<std::size_t>(k);
    const int par = F.parent[uk];
    auto b = raw[uk];
    if (par >= 0) {
      const auto& pb = path.beta[static_cast<std::size_t>(par)];
      b[0] += std::round(pb[0] - b[0]);
      b[1] += std::round(pb[1] - b[1]);
    }
    path.beta[uk] = b;
  }
  for (int k : F.order) {
    const int i = k % g.n, j = k / g.n;
    const auto& b = path.beta[static_cast<std::size_t>(k)];
    for (auto [ii, jj] : {std::pair{i + 1, j}, std::pair{i, j + 1}}) {
      if (!g.is_active(ii, jj)) continue;
      const auto& c = path.beta[g.index(ii, jj)];
      if (std::abs(b[0] - c[0]) >= 0.5 || std::abs(b[1] - c[1]) >= 0.5)
        throw Error(ErrorKind::UnwrapFailure, "Betti coordinates jump by 1/2 or more between neighbours");
    }
  }
  return path;
}

FiberLattice transport_basis(const EllipticSurface& s, const std::vector<cplx>& pts, const FiberLattice& start,
                             int substeps) {
  FiberLattice cur = start;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k)
    for (int m = 1; m <= substeps; ++m) {
      const cplx t = pts[k] + (pts[k + 1] - pts[k]) * (static_cast<double>(m) / substeps);
      cur = align_basis(fiber_periods(s, t), cur.w1, cur.w2);
    }
  return cur;
}

}  // namespace bh
