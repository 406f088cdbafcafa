#include "betti_heights/brody.hpp"

#include <algorithm>
#include <cmath>

#include "betti_heights/error.hpp"
#include "betti_heights/parallel.hpp"

namespace bh {

Mobius Mobius::then(const Mobius& o) const {
  return {o.a * a + o.b * c, o.a * b + o.b * d, o.c * a + o.d * c, o.c * b + o.d * d};
}

std::vector<cplx> DiscMap::eval(cplx z) const {
  const cplx t = chart(z);
  std::vector<cplx> out;
  out.reserve(map.size());
  for (const auto& f : map.components()) out.push_back(f.eval(t));
  return out;
}

double DiscMap::derivative_norm(cplx z) const {
  return std::abs(chart.derivative(z)) * bh::derivative_norm(map, chart(z));
}

double derivative_norm(const ProductMap& m, cplx z) { return std::sqrt(fs_density(m, z)); }

std::pair<cplx, double> grid_argmax(const std::function<double(cplx)>& f, const Disc& d, int base, int levels) {
  if (base < 2 || levels < 1 || !(d.radius > 0)) throw Error(ErrorKind::InvalidArgument, "grid_argmax: bad grid");
  cplx center = d.center;
  double half = d.radius;
  cplx best = d.center;
  double best_val = -1.0;
  for (int level = 0; level < levels; ++level) {
    const double h = 2 * half / (base - 1);
    const int nn = base * base;
    std::vector<double> vals(nn, -1.0);
    std::vector<cplx> pts(nn);
    parallel_for(nn, [&](int k) {
      const int i = k % base, j = k / base;
      cplx t = center + cplx(-half + i * h, -half + j * h);
      // Nodes outside the disc are projected onto its boundary so that the
      // maximum on the closed disc is reachable.
      const double r = std::abs(t - d.center);
      if (r > d.radius) t = d.center + (t - d.center) * (d.radius / r);
      pts[k] = t;
      vals[k] = f(t);
    });
    if (level == 0) {
      // the centre itself is always a candidate
      const double v = f(d.center);
      if (v > best_val) best_val = v, best = d.center;
    }
    for (int k = 0; k < nn; ++k)
      if (vals[k] > best_val) best_val = vals[k], best = pts[k];
    center = best;
    half = 2 * h;
  }
  return {best, best_val};
}

bool ZoomSequence::valid() const {
  for (std::size_t k = 1; k < steps.size(); ++k) {
    if (!(steps[k].scale < steps[k - 1].scale)) return false;
    if (steps[k].scale * steps[k].norm < steps[k - 1].scale * steps[k - 1].norm) return false;
  }
  return !steps.empty();
}

ZoomSequence zoom_sequence(const MapFamily& family, const Disc& d, const std::vector<int>& n_range,
                           const ZoomOptions& opts) {
  if (n_range.empty()) throw Error(ErrorKind::InvalidArgument, "zoom_sequence: empty index range");
  if (!(d.radius > 0)) throw Error(ErrorKind::InvalidArgument, "zoom_sequence: disc radius must be positive");
  const int count = static_cast<int>(n_range.size());
  std::vector<ProductMap> maps(count);
  for (int k = 0; k < count; ++k) maps[k] = family(n_range[k]);

  std::vector<std::pair<cplx, double>> peaks(count);
  // The argmax itself is node-parallel; indices run in order.
  for (int k = 0; k < count; ++k) {
    for (const auto& f : maps[k].components()) f.require_pole_free(d);
    peaks[k] = grid_argmax([&](cplx t) { return derivative_norm(maps[k], t); }, d, opts.base, opts.levels);
  }

  double top = 0.0;
  for (const auto& p : peaks) top = std::max(top, p.second);
  const double first = peaks.front().second;
  if (!(top > 0) || top < opts.growth_threshold * first)
    throw Error(ErrorKind::NormBounded, "maximal derivative norm grows by less than the threshold (max " +
                                            std::to_string(top) + ", first " + std::to_string(first) + ")");

  const double outer = opts.outer_factor * d.radius;
  ZoomSequence seq;
  for (int k = 0; k < count; ++k) {
    ZoomStep st;
    st.n = n_range[k];
    st.center = peaks[k].first;
    st.norm = peaks[k].second;
    const double to_edge = outer - std::abs(st.center - d.center);
    st.scale = st.norm > 0 ? std::min(1.0 / std::sqrt(st.norm), to_edge) : to_edge;
    st.map = DiscMap{maps[k], Mobius::affine(st.center, st.scale), 1.0};
    seq.steps.push_back(std::move(st));
  }
  return seq;
}

Reparametrization brody_reparametrize(const DiscMap& phi, double target_c, int base, int levels) {
  if (!(target_c > 0)) throw Error(ErrorKind::InvalidArgument, "brody_reparametrize: target_c must be positive");
  const double r = phi.radius;
  if (!(r > 0)) throw Error(ErrorKind::InvalidArgument, "brody_reparametrize: radius must be positive");
  auto mu = [&](cplx z) { return phi.derivative_norm(z) * (r * r - std::norm(z)) / r; };
  const auto [z0, m] = grid_argmax(mu, {0.0, r}, base, levels);
  if (!(m > 1e-300) || !std::isfinite(m)) throw Error(ErrorKind::ConstantMap, "derivative vanishes on the disc");

  // T(w) = (r w + r z0) / (conj(z0) w / r + r) maps the disc of radius r onto
  // itself with T(0) = z0 and T'(0) = 1 - |z0|^2/r^2.
  const cplx a = z0 / r;
  const Mobius T{r, r * z0, std::conj(a), r};
  const double lambda = target_c * r / m;
  const Mobius S = Mobius::affine(0.0, lambda);

  Reparametrization out;
  out.z0 = z0;
  out.mu_max = m;
  out.lambda = lambda;
  out.psi = DiscMap{phi.map, S.then(T).then(phi.chart), r / lambda};
  return out;
}

double interior_bound(const DiscMap& psi, double probe_radius, int grid_n) {
  const double R = psi.radius;
  const double pr = std::min(probe_radius, R);
  const double h = 2 * pr / (grid_n - 1);
  std::vector<double> vals(static_cast<std::size_t>(grid_n) * grid_n, 0.0);
  parallel_for(grid_n * grid_n, [&](int k) {
    const cplx z(-pr + (k % grid_n) * h, -pr + (k / grid_n) * h);
    if (std::abs(z) > pr) return;
    vals[k] = psi.derivative_norm(z) * (R * R - std::norm(z)) / (R * R);
  });
  return *std::max_element(vals.begin(), vals.end());
}

double chordal(cplx p, cplx q) {
  if (!std::isfinite(std::abs(p)) && !std::isfinite(std::abs(q))) return 0.0;
  if (!std::isfinite(std::abs(p))) return 1.0 / std::sqrt(1 + std::norm(q));
  if (!std::isfinite(std::abs(q))) return 1.0 / std::sqrt(1 + std::norm(p));
  return std::abs(p - q) / std::sqrt((1 + std::norm(p)) * (1 + std::norm(q)));
}

ProbeReport limit_probe(const std::vector<DiscMap>& seq, double probe_radius, int grid_n, double tol) {
  if (seq.empty()) throw Error(ErrorKind::InvalidArgument, "limit_probe: empty sequence");
  if (grid_n < 2 || !(probe_radius > 0)) throw Error(ErrorKind::InvalidArgument, "limit_probe: bad probe grid");
  for (std::size_t k = 0; k < seq.size(); ++k)
    if (seq[k].radius < probe_radius)
      throw Error(ErrorKind::ProbeRadiusTooLarge, "map " + std::to_string(k) + " is defined on radius " +
                                                      std::to_string(seq[k].radius));
  std::vector<cplx> grid;
  const double h = 2 * probe_radius / (grid_n - 1);
  for (int j = 0; j < grid_n; ++j)
    for (int i = 0; i < grid_n; ++i) {
      const cplx z(-probe_radius + i * h, -probe_radius + j * h);
      if (std::abs(z) <= probe_radius * (1 + 1e-12)) grid.push_back(z);
    }
  const int np = static_cast<int>(grid.size());

  std::vector<std::vector<std::vector<cplx>>> values(seq.size());
  for (std::size_t k = 0; k < seq.size(); ++k) {
    values[k].resize(np);
    parallel_for(np, [&](int i) { values[k][i] = seq[k].eval(grid[i]); });
  }

  ProbeReport rep;
  for (std::size_t k = 1; k < seq.size(); ++k) {
    double sup = 0.0;
    for (int i = 0; i < np; ++i) {
      const auto& p = values[k - 1][i];
      const auto& q = values[k][i];
      if (p.size() != q.size()) throw Error(ErrorKind::InvalidArgument, "limit_probe: target dimensions differ");
      for (std::size_t f = 0; f < p.size(); ++f) sup = std::max(sup, chordal(p[f], q[f]));
    }
    rep.distances.push_back(sup);
  }
  rep.cauchy = rep.distances.empty() || rep.distances.back() < tol;

  const auto& last = values.back();
  double diam = 0.0;
  if (!last.empty() && !last[0].empty())
    for (int i = 0; i < np; ++i)
      for (int j = i + 1; j < np; ++j) diam = std::max(diam, chordal(last[i][0], last[j][0]));
  rep.verticality = diam;
  for (int i = 0; i < np; ++i) rep.limit_samples.push_back({grid[i], last[i]});
  return rep;
}

}  // namespace bh
