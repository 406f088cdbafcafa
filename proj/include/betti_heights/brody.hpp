#pragma once

// Zoom sequences at derivative blow-up points, Brody reparametrisation of
// disc maps and numerical probes of the limiting entire curve.

#include <functional>

#include "betti_heights/forms.hpp"

namespace bh {

// z -> (a z + b) / (c z + d)
struct Mobius {
  cplx a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static Mobius affine(cplx center, double scale) { return {scale, center, 0.0, 1.0}; }
  cplx operator()(cplx z) const { return (a * z + b) / (c * z + d); }
  cplx derivative(cplx z) const {
    const cplx den = c * z + d;
    return (a * d - b * c) / (den * den);
  }
  Mobius then(const Mobius& outer) const;  // outer o this
};

// phi(z) = map(chart(z)) on the closed disc |z| <= radius.
struct DiscMap {
  ProductMap map;
  Mobius chart;
  double radius = 1.0;

  std::vector<cplx> eval(cplx z) const;
  // || d phi (z) || for the product Fubini-Study metric.
  double derivative_norm(cplx z) const;
};

// sqrt(fs_density(m, z)).
double derivative_norm(const ProductMap& m, cplx z);

// Multilevel grid maximisation over a closed disc (levels refinements of a
// base x base grid). Deterministic: ties go to the lowest index.
std::pair<cplx, double> grid_argmax(const std::function<double(cplx)>& f, const Disc& d, int base = 64,
                                    int levels = 3);

struct ZoomOptions {
  double growth_threshold = 4.0;  // max norm / first norm below this -> NormBounded
  int base = 64;
  int levels = 3;
  double outer_factor = 2.0;      // D' = disc(center, outer_factor * radius)
};

struct ZoomStep {
  int n = 0;
  cplx center;         // b_n
  double norm = 0.0;   // || d x_n (b_n) ||
  double scale = 0.0;  // r_n
  DiscMap map;         // z -> x_n(b_n + r_n z) on the unit disc
};

struct ZoomSequence {
  std::vector<ZoomStep> steps;
  bool valid() const;  // r_n strictly decreasing, r_n * norm nondecreasing
};

using MapFamily = std::function<ProductMap(int)>;

// NormBounded when the maximal derivative norm does not grow by
// opts.growth_threshold over n_range.
ZoomSequence zoom_sequence(const MapFamily& family, const Disc& d, const std::vector<int>& n_range,
                           const ZoomOptions& opts = {});

struct Reparametrization {
  DiscMap psi;
  cplx z0;          // maximiser of mu in the source disc
  double mu_max = 0.0;
  double lambda = 0.0;  // psi(w) = phi(T(lambda w)), T(0) = z0
};

// Maximises mu(z) = ||d phi(z)|| (r^2 - |z|^2) / r, moves the maximiser to 0
// by a disc automorphism and rescales so that ||d psi(0)|| = target_c.
// ConstantMap when mu vanishes.
Reparametrization brody_reparametrize(const DiscMap& phi, double target_c, int base = 64, int levels = 3);

// max over the grid of ||d psi(z)|| (R^2 - |z|^2) / R^2.
double interior_bound(const DiscMap& psi, double probe_radius, int grid_n);

// Chordal distance on P^1 in affine coordinates.
double chordal(cplx p, cplx q);

struct ProbeReport {
  bool cauchy = false;
  double verticality = 0.0;
  std::vector<double> distances;  // consecutive sup-distances
  struct Sample {
    cplx z;
    std::vector<cplx> coords;
  };
  std::vector<Sample> limit_samples;
};

// ProbeRadiusTooLarge if some map is defined on a smaller disc.
ProbeReport limit_probe(const std::vector<DiscMap>& seq, double probe_radius, int grid_n, double tol);

}  // namespace bh
