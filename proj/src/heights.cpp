#include "betti_heights/heights.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "betti_heights/error.hpp"
#include "betti_heights/parallel.hpp"

namespace bh {

namespace {

constexpr double kPi = std::numbers::pi;

// Neumaier summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

}  // namespace

double DensityGrid::max_value() const {
  double m = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k)
    if (active[k]) m = std::max(m, values[k]);
  return m;
}

double DensityGrid::min_value() const {
  double m = 0.0;
  bool first = true;
  for (std::size_t k = 0; k < values.size(); ++k)
    if (active[k] && (first || values[k] < m)) m = values[k], first = false;
  return m;
}

DensityGrid betti_density(const LatticeField& field, const BettiPath& path, int bundle_degree) {
  const Grid& g = field.grid;
  if (g.n < 8) throw Error(ErrorKind::InvalidArgument, "grid size must be at least 8");
  if (path.beta.size() != g.size())
    throw Error(ErrorKind::GridMismatch, "Betti path and lattice field use different grids");
  DensityGrid d;
  d.chart = g.disc;
  d.n = g.n;
  d.h = g.h;
  d.active = g.active;
  d.values.assign(g.size(), 0.0);
  if (path.zero) return d;
  const int n = g.n;
  const double h = g.h;
  // d beta / d(direction) at (i, j); one-sided second order where a neighbour is missing.
  auto diff = [&](int i, int j, int di, int dj) {
    std::array<double, 2> out{};
    const auto& b0 = path.beta[g.index(i, j)];
    if (g.is_active(i + di, j + dj) && g.is_active(i - di, j - dj)) {
      const auto& bp = path.beta[g.index(i + di, j + dj)];
      const auto& bm = path.beta[g.index(i - di, j - dj)];
      for (std::size_t c = 0; c < 2; ++c) out[c] = (bp[c] - bm[c]) / (2 * h);
    } else if (g.is_active(i + di, j + dj) && g.is_active(i + 2 * di, j + 2 * dj)) {
      const auto& b1 = path.beta[g.index(i + di, j + dj)];
      const auto& b2 = path.beta[g.index(i + 2 * di, j + 2 * dj)];
      for (std::size_t c = 0; c < 2; ++c) out[c] = (-3 * b0[c] + 4 * b1[c] - b2[c]) / (2 * h);
    } else if (g.is_active(i - di, j - dj) && g.is_active(i - 2 * di, j - 2 * dj)) {
      const auto& b1 = path.beta[g.index(i - di, j - dj)];
      const auto& b2 = path.beta[g.index(i - 2 * di, j - 2 * dj)];
      for (std::size_t c = 0; c < 2; ++c) out[c] = (3 * b0[c] - 4 * b1[c] + b2[c]) / (2 * h);
    } else {
      throw Error(ErrorKind::GridMismatch, "finite-difference stencil leaves the active grid");
    }
    return out;
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!g.is_active(i, j)) continue;
      const auto du = diff(i, j, 1, 0), dv = diff(i, j, 0, 1);
      d.values[g.index(i, j)] = bundle_degree * (du[0] * dv[1] - dv[0] * du[1]);
    }
  return d;
}

const LatticeField& FieldCache::field(const Disc& chart, int n, Precision precision) {
  const auto key = std::make_tuple(chart.center.real(), chart.center.imag(), chart.radius, n,
                                   static_cast<int>(precision));
  auto it = fields_.find(key);
  if (it == fields_.end())
    it = fields_.emplace(key, std::make_unique<LatticeField>(lattice_continue(*surface_, chart, n, precision))).first;
  return *it->second;
}

double partial_height_on_grid(FieldCache& cache, const Section& p, const Disc& chart, int n, int bundle_degree,
                              Precision precision) {
  if (p.is_zero()) return 0.0;
  const LatticeField& F = cache.field(chart, n, precision);
  const DensityGrid d = betti_density(F, betti_path(cache.surface(), p, F), bundle_degree);
  CompensatedSum sum;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double w = F.grid.cell_weight(i, j);
      if (w > 0.0) sum.add(w * d.at(i, j));
    }
  return sum.value();
}

HeightReport partial_height(const EllipticSurface& s, const Section& p, const Disc& chart,
                            const QuadratureOptions& opts, FieldCache* cache) {
  if (!(chart.radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "disc radius must be positive");
  if (opts.base_n < 8 || opts.max_levels < 2)
    throw Error(ErrorKind::InvalidArgument, "need base_n >= 8 and at least two levels");
  HeightReport r;
  if (p.is_zero()) return r;
  FieldCache local(s);
  FieldCache& c = cache ? *cache : local;
  int n = opts.base_n;
  for (int level = 0; level < opts.max_levels; ++level, n *= 2) {
    const double v = partial_height_on_grid(c, p, chart, n, opts.bundle_degree, opts.precision);
    r.levels.push_back(n);
    r.values.push_back(v);
    r.value = v;
    if (level > 0) {
      r.error = std::abs(v - r.values[r.values.size() - 2]);
      if (r.error < opts.tol) return r;
    }
  }
  throw Error(ErrorKind::QuadratureStalled, "partial height did not reach tol " + std::to_string(opts.tol) +
                                                " (last delta " + std::to_string(r.error) + ", value " +
                                                std::to_string(r.value) + ")");
}

// ---------------------------------------------------------------- pointwise density

namespace {

class DensityEvaluator {
 public:
  DensityEvaluator(const EllipticSurface& s, const Section& p, int bundle_degree)
      : s_(s), zero_(p.is_zero()), deg_(bundle_degree) {
    if (!zero_) {
      x_ = NumericRatFun(p.x());
      y_ = NumericRatFun(p.y());
    }
  }

  double operator()(cplx t, double step) const {
    if (zero_) return 0.0;
    if (step <= 0.0) {
      double d = 1.0;
      for (const auto& f : s_.bad_fibers()) d = std::min(d, std::abs(t - f.t));
      step = 1e-3 * d;
    }
    const FiberLattice L0 = fiber_periods(s_, t);
    const cplx z0 = elliptic_log(s_.a_numeric()(t), s_.b_numeric()(t), x_(t), y_(t), L0);
    const auto b0 = lattice_coordinates(z0, L0);
    const cplx tau0 = L0.tau();
    // Four-point rule: sum_k f(t + h i^k) i^-k / (4h) = f'(t) + O(h^4).
    cplx du = 0.0, dtau = 0.0, rot = 1.0;
    for (int k = 0; k < 4; ++k) {
      const cplx tk = t + step * rot;
      const cplx a = s_.a_numeric()(tk), b = s_.b_numeric()(tk);
      const FiberLattice Lk = align_basis(lattice_from_coefficients(a, b, tk), L0.w1, L0.w2);
      const cplx zk = elliptic_log(a, b, x_(tk), y_(tk), Lk, z0);
      auto bk = lattice_coordinates(zk, Lk);
      bk[0] += std::round(b0[0] - bk[0]);
      bk[1] += std::round(b0[1] - bk[1]);
      const cplx tauk = Lk.tau();
      du += (bk[0] + bk[1] * tauk) / rot;
      dtau += tauk / rot;
      rot *= cplx(0.0, 1.0);
    }
    du /= 4.0 * step;
    dtau /= 4.0 * step;
    return deg_ * std::norm(du - b0[1] * dtau) / tau0.imag();
  }

 private:
  const EllipticSurface& s_;
  bool zero_;
  int deg_;
  NumericRatFun x_, y_;
};

}  // namespace

double betti_density_at(const EllipticSurface& s, const Section& p, cplx t, double step, int bundle_degree) {
  return DensityEvaluator(s, p, bundle_degree)(t, step);
}

// ---------------------------------------------------------------- full height

namespace {

struct Special {
  cplx where;  // chart coordinate
  bool infinity_chart;
  bool bad;
  bool log_tail;
};

bool near_any(cplx z, const std::vector<cplx>& pts, double tol) {
  return std::any_of(pts.begin(), pts.end(), [&](cplx q) { return std::abs(q - z) <= tol * std::max(1.0, std::abs(z)); });
}

std::vector<cplx> roots_of(const Poly& p) { return p.degree() > 0 ? p.roots() : std::vector<cplx>{}; }

// Candidate special points of one chart model: bad fibers and poles of x.
void collect(const EllipticSurface& m, const Section& p, bool infinity_chart, std::vector<Special>& out,
             std::vector<std::pair<cplx, bool>>& all) {
  const std::vector<cplx> jpoles = roots_of(m.j_invariant().den());
  for (const auto& f : m.bad_fibers()) {
    out.push_back({f.t, infinity_chart, true, near_any(f.t, jpoles, 1e-6)});
    all.emplace_back(f.t, infinity_chart);
  }
  if (!p.is_zero())
    for (cplx r : roots_of(p.x().den())) {
      bool dup = false;
      for (const auto& sp : out)
        if (sp.infinity_chart == infinity_chart && std::abs(sp.where - r) < 1e-9) dup = true;
      if (!dup) out.push_back({r, infinity_chart, false, false});
    }
}

double pick_chart_radius(const std::vector<Special>& t_pts) {
  double best = 2.0, score = -1.0;
  for (double R : {2.0, 1.5, 2.5, 3.0, 1.25, 4.0, 1.0, 5.0, 0.75, 8.0}) {
    double sc = 1e9;
    for (const auto& sp : t_pts)
      if (std::abs(sp.where) > 0) sc = std::min(sc, std::abs(std::log(std::abs(sp.where) / R)));
    if (sc > score + 1e-12) best = R, score = sc;
  }
  return best;
}

// Extrapolates E_k (integral outside radius eps_k) to eps -> 0.
std::pair<double, double> extrapolate_tail(const std::vector<double>& E, const std::vector<double>& L, bool log_tail) {
  const std::size_t n = E.size();
  auto estimate = [&](std::size_t end) -> double {
    const std::size_t i0 = end - 3;
    if (log_tail) {
      // E = E_inf + A / L^2 + B / L^3
      Eigen::Matrix3d M;
      Eigen::Vector3d v;
      for (int r = 0; r < 3; ++r) {
        const double l = L[i0 + static_cast<std::size_t>(r)];
        M(r, 0) = 1.0;
        M(r, 1) = 1.0 / (l * l);
        M(r, 2) = 1.0 / (l * l * l);
        v(r) = E[i0 + static_cast<std::size_t>(r)];
      }
      return M.colPivHouseholderQr().solve(v)(0);
    }
    const double d1 = E[i0 + 1] - E[i0], d2 = E[i0 + 2] - E[i0 + 1];
    if (d2 == 0.0 || d1 == d2 || d2 / d1 <= 0.0 || d2 / d1 >= 1.0) return E[i0 + 2] + d2;
    return E[i0 + 2] - d2 * d2 / (d2 - d1);  // Aitken
  };
  if (n < 4) return {E.back(), n >= 2 ? std::abs(E[n - 1] - E[n - 2]) : 0.0};
  const double a = estimate(n), b = estimate(n - 1);
  return {a, std::abs(a - b)};
}

}  // namespace

FullHeightReport full_height(const EllipticSurface& s, const Section& p, const FullHeightOptions& opts) {
  if (p.is_zero()) throw Error(ErrorKind::InvalidArgument, "full height needs a nonzero section");
  if (!(opts.excision_radius > 0.0) || opts.levels < 3 || opts.grid_n < 16 || opts.angular < 8)
    throw Error(ErrorKind::InvalidArgument, "invalid full-height options");
  const EllipticSurface sw = s.infinity_model();
  const Section pw = s.section_at_infinity(p);

  std::vector<Special> t_pts, w_pts;
  std::vector<std::pair<cplx, bool>> unused;
  collect(s, p, false, t_pts, unused);
  collect(sw, pw, true, w_pts, unused);
  const double R = pick_chart_radius(t_pts);

  // Assign every point to exactly one chart: |t| < R or |w| < 1/R.
  std::vector<Special> pts;
  for (const auto& sp : t_pts)
    if (std::abs(sp.where) < R) pts.push_back(sp);
  for (const auto& sp : w_pts)
    if (std::abs(sp.where) < 1.0 / R) pts.push_back(sp);
  bool has_w0 = false;
  for (const auto& sp : pts)
    if (sp.infinity_chart && std::abs(sp.where) < 1e-12) has_w0 = true;
  if (!has_w0) pts.push_back({0.0, true, false, false});

  FullHeightReport rep;
  rep.chart_radius = R;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      if (pts[a].infinity_chart == pts[b].infinity_chart &&
          std::abs(pts[a].where - pts[b].where) <= 2.0 * opts.excision_radius)
        throw Error(ErrorKind::OverlappingExcisions, "excision discs overlap; use a smaller excision radius");

  // Patch radii: well inside the chart and clear of each other.
  for (const auto& sp : pts) {
    const double chart_r = sp.infinity_chart ? 1.0 / R : R;
    double r = std::min(1.0, 0.9 * (chart_r - std::abs(sp.where)));
    for (const auto& o : pts)
      if (&o != &sp && o.infinity_chart == sp.infinity_chart) r = std::min(r, 0.45 * std::abs(o.where - sp.where));
    FullHeightReport::Patch patch;
    patch.at_infinity_chart = sp.infinity_chart;
    patch.center = sp.where;
    patch.radius = r;
    patch.bad = sp.bad;
    patch.log_tail = sp.log_tail;
    rep.patches.push_back(patch);
  }

  const DensityEvaluator dens_t(s, p, opts.bundle_degree), dens_w(sw, pw, opts.bundle_degree);

  // Bulk: each chart disc minus its patches, midpoint rule with exact weights.
  auto bulk = [&](int n) {
    CompensatedSum total;
    for (int chart = 0; chart < 2; ++chart) {
      const bool inf = chart == 1;
      const Disc D{0.0, inf ? 1.0 / R : R};
      const double h = 2.0 * D.radius / n;
      std::vector<double> contrib(static_cast<std::size_t>(n) * n, 0.0);
      parallel_for(contrib.size(), [&](std::size_t k) {
        const int i = static_cast<int>(k) % n, j = static_cast<int>(k) / n;
        const double x0 = -D.radius + i * h, y0 = -D.radius + j * h;
        double w = rect_disc_area(x0, x0 + h, y0, y0 + h, D);
        if (w <= 0.0) return;
        for (const auto& pt : rep.patches)
          if (pt.at_infinity_chart == inf) w -= rect_disc_area(x0, x0 + h, y0, y0 + h, {pt.center, pt.radius});
        if (w <= 1e-18 * h * h) return;
        const cplx t(x0 + 0.5 * h, y0 + 0.5 * h);
        contrib[k] = w * (inf ? dens_w(t, 0.0) : dens_t(t, 0.0));
      });
      for (double v : contrib) total.add(v);
    }
    return total.value();
  };
  const double coarse = bulk(opts.grid_n / 2);
  rep.bulk = bulk(opts.grid_n);
  rep.bulk_error = std::abs(rep.bulk - coarse);

  // Patches: log-polar coordinates t = c + e^(s + i theta), density rho r^2.
  std::vector<double> excised_total(static_cast<std::size_t>(opts.levels) + 1, rep.bulk);
  for (auto& pt : rep.patches) {
    const DensityEvaluator& dens = pt.at_infinity_chart ? dens_w : dens_t;
    const double eps0 = std::min(opts.excision_radius, 0.5 * pt.radius);
    const int M = opts.angular;
    auto ring = [&](double sv) {
      const double r = std::exp(sv);
      std::vector<double> vals(static_cast<std::size_t>(M));
      parallel_for(vals.size(), [&](std::size_t m) {
        const double th = 2.0 * kPi * (static_cast<double>(m) + 0.5) / M;
        vals[m] = dens(pt.center + std::polar(r, th), 1e-3 * r) * r * r;
      });
      CompensatedSum sum;
      for (double v : vals) sum.add(v);
      return sum.value() * 2.0 * kPi / M;
    };
    using GL = boost::math::quadrature::gauss<double, 8>;
    // From the patch edge in to eps0, panels of width <= ln 2.
    const double s_out = std::log(pt.radius), s_in = std::log(eps0);
    const int outer_panels = std::max(1, static_cast<int>(std::ceil((s_out - s_in) / std::log(2.0))));
    double acc = 0.0;
    for (int k = 0; k < outer_panels; ++k) {
      const double a = s_in + (s_out - s_in) * k / outer_panels, b = s_in + (s_out - s_in) * (k + 1) / outer_panels;
      acc += GL::integrate(ring, a, b);
    }
    std::vector<double> L;
    pt.excised.push_back(acc);
    L.push_back(-s_in);
    for (int k = 1; k <= opts.levels; ++k) {
      const double b = s_in - (k - 1) * std::log(2.0), a = b - std::log(2.0);
      acc += GL::integrate(ring, a, b);
      pt.excised.push_back(acc);
      L.push_back(-a);
    }
    for (std::size_t k = 0; k < pt.excised.size(); ++k) excised_total[k] += pt.excised[k];
    std::tie(pt.extrapolated, pt.error) = extrapolate_tail(pt.excised, L, pt.log_tail);
  }

  rep.value = rep.bulk;
  rep.error = rep.bulk_error;
  for (const auto& pt : rep.patches) {
    rep.value += pt.extrapolated;
    rep.error += pt.error;
  }
  for (int k = 0; k <= opts.levels; ++k) rep.levels.push_back(k);
  rep.values = excised_total;
  return rep;
}

// ---------------------------------------------------------------- pairing, Gram, ratios

double pairing(FieldCache& cache, const Section& p, const Section& q, const Disc& chart, int n, int bundle_degree) {
  const EllipticSurface& s = cache.surface();
  const double hpq = partial_height_on_grid(cache, section_add(s, p, q), chart, n, bundle_degree);
  const double hp = partial_height_on_grid(cache, p, chart, n, bundle_degree);
  const double hq = partial_height_on_grid(cache, q, chart, n, bundle_degree);
  return 0.5 * (hpq - hp - hq);
}

GramResult gram(const EllipticSurface& s, const std::vector<Section>& sections, const Disc& chart, int grid_n,
                const QuadratureOptions& opts) {
  FieldCache cache(s);
  GramResult g;
  if (grid_n <= 0) {
    grid_n = opts.base_n * 2;
    for (const auto& p : sections) {
      const HeightReport r = partial_height(s, p, chart, opts, &cache);
      if (!r.levels.empty()) grid_n = std::max(grid_n, r.levels.back());
    }
  }
  g.grid_n = grid_n;
  const auto k = static_cast<Eigen::Index>(sections.size());
  g.matrix = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i; j < k; ++j) {
      const auto& P = sections[static_cast<std::size_t>(i)];
      const auto& Q = sections[static_cast<std::size_t>(j)];
      const double v = i == j ? partial_height_on_grid(cache, P, chart, grid_n, opts.bundle_degree, opts.precision)
                              : pairing(cache, P, Q, chart, grid_n, opts.bundle_degree);
      g.matrix(i, j) = g.matrix(j, i) = v;
    }
  const Eigen::MatrixXd sym = 0.5 * (g.matrix + g.matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  g.eigenvalues = es.eigenvalues();
  g.min_eigenvalue = k > 0 ? g.eigenvalues.minCoeff() : 0.0;
  return g;
}

std::vector<NondegEntry> nondeg_ratio(const EllipticSurface& s, const Section& p, const Disc& chart, int m_max,
                                      const QuadratureOptions& opts, const TateOptions& tate) {
  if (m_max < 1) throw Error(ErrorKind::InvalidArgument, "m_max must be at least 1");
  FieldCache cache(s);
  std::vector<NondegEntry> out;
  for (int m = 1; m <= m_max; ++m) {
    const Section q = section_mul(s, m, p);
    const TateReport th = tate_height(s, q, tate);
    if (th.value == 0.0)
      throw Error(ErrorKind::DegenerateDenominator, "Tate height of " + std::to_string(m) + "P is zero (torsion)");
    const HeightReport hr = partial_height(s, q, chart, opts, &cache);
    out.push_back({m, hr.value, hr.error, th.value, hr.value / th.value});
  }
  return out;
}

// ---------------------------------------------------------------- output

void write_density_csv(std::ostream& out, const DensityGrid& g) {
  out << "t_re,t_im,rho\n" << std::setprecision(17);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * g.n + i;
      if (!g.active[k] || !g.chart.contains(g.node(i, j))) continue;
      const cplx t = g.node(i, j);
      out << t.real() << ',' << t.imag() << ',' << g.values[k] << '\n';
    }
}

void write_density_svg(std::ostream& out, const DensityGrid& g) {
  const double lo = g.min_value(), hi = g.max_value();
  const int cell = std::max(1, 512 / std::max(1, g.n));
  const int size = cell * g.n;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size + 24 << "\">\n";
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      if (!g.chart.contains(g.node(i, j))) continue;
      const double v = g.at(i, j);
      const double f = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.0;
      const int r = static_cast<int>(255 * f), b = 255 - r;
      out << "<rect x=\"" << i * cell << "\" y=\"" << (g.n - 1 - j) * cell << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"rgb(" << r << ",0," << b << ")\"/>\n";
    }
  out << "<text x=\"2\" y=\"" << size + 16 << "\" font-size=\"12\">min " << lo << "  max " << hi << "</text>\n";
  out << "</svg>\n";
}

}  // namespace bh
