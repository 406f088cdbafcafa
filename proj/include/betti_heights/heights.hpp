#pragma once

// Betti-form densities along sections, partial and full heights, the height
// pairing and the experiments built on it.

#include <map>
#include <memory>
#include <ostream>
#include <tuple>

#include <Eigen/Dense>

#include "betti_heights/periods.hpp"

namespace bh {

// rho(t) with s^* omega = rho(t) du dv on the chart, t = u + i v.
struct DensityGrid {
  Disc chart;
  int n = 0;
  double h = 0.0;
  std::vector<double> values;  // row-major, 0 on inactive nodes
  std::vector<char> active;

  cplx node(int i, int j) const {
    return chart.center + cplx(-chart.radius + (i + 0.5) * h, -chart.radius + (j + 0.5) * h);
  }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * n + i]; }
  double max_value() const;
  double min_value() const;
};

// bundle_degree * det d(beta1, beta2)/d(u, v) by finite differences on the grid.
DensityGrid betti_density(const LatticeField& field, const BettiPath& path, int bundle_degree = 2);

struct QuadratureOptions {
  double tol = 1e-6;   // absolute, on successive grid doublings
  int base_n = 32;
  int max_levels = 5;  // grids base_n * 2^k, k < max_levels
  int bundle_degree = 2;
  Precision precision = Precision::Double;
};

struct HeightReport {
  double value = 0.0;
  double error = 0.0;
  std::vector<int> levels;  // grid sizes (or excision levels) used
  std::vector<double> values;
};

// Lattice fields keyed by (chart, grid size), shared between sections so that
// polarisation identities are evaluated on identical grids.
class FieldCache {
 public:
  explicit FieldCache(const EllipticSurface& s) : surface_(&s) {}
  const LatticeField& field(const Disc& chart, int n, Precision precision = Precision::Double);
  const EllipticSurface& surface() const { return *surface_; }

 private:
  const EllipticSurface* surface_;
  std::map<std::tuple<double, double, double, int, int>, std::unique_ptr<LatticeField>> fields_;
};

// Midpoint quadrature of the grid density with exact cell/disc overlap
// weights, doubled until successive values differ by less than opts.tol.
// QuadratureStalled when max_levels is reached first.
HeightReport partial_height(const EllipticSurface& s, const Section& p, const Disc& chart,
                            const QuadratureOptions& opts = {}, FieldCache* cache = nullptr);

// Value at one fixed grid size; the building block of the shared-grid
// polarisation identities.
double partial_height_on_grid(FieldCache& cache, const Section& p, const Disc& chart, int n, int bundle_degree = 2,
                              Precision precision = Precision::Double);

// Pointwise density from holomorphic derivatives of u = z/w1 and tau = w2/w1:
// rho = deg * |u' - beta2 tau'|^2 / Im tau. `step` is the difference step for
// the derivatives (0 picks one from the distance to the nearest bad fiber).
double betti_density_at(const EllipticSurface& s, const Section& p, cplx t, double step = 0.0,
                        int bundle_degree = 2);

struct FullHeightOptions {
  double excision_radius = 0.05;
  int levels = 30;    // excision radii excision_radius * 2^-k, k = 0..levels
  int grid_n = 256;   // bulk grid per chart; the error estimate uses grid_n / 2 too
  int angular = 48;   // angular nodes on the excision annuli
  int bundle_degree = 2;
};

struct FullHeightReport : HeightReport {
  double bulk = 0.0;
  double bulk_error = 0.0;
  double chart_radius = 0.0;  // |t| <= R in the t-chart, |w| < 1/R in the w-chart
  struct Patch {
    bool at_infinity_chart = false;
    cplx center;
    double radius = 0.0;
    bool bad = false;
    bool log_tail = false;  // j has a pole: 1/L^2 tail model, else power tail
    std::vector<double> excised;  // integral over radius >= excision_radius * 2^-k
    double extrapolated = 0.0;
    double error = 0.0;
  };
  std::vector<Patch> patches;
};

// Integral of the Betti density over P^1 with excision discs around bad
// fibers (and around poles of x(P)), extrapolated to zero excision radius.
FullHeightReport full_height(const EllipticSurface& s, const Section& p, const FullHeightOptions& opts = {});

// <P, Q> by polarisation at one shared grid size.
double pairing(FieldCache& cache, const Section& p, const Section& q, const Disc& chart, int n,
               int bundle_degree = 2);

struct GramResult {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd eigenvalues;
  double min_eigenvalue = 0.0;
  int grid_n = 0;
};

// grid_n = 0 picks the finest grid any single partial_height needed to converge.
GramResult gram(const EllipticSurface& s, const std::vector<Section>& sections, const Disc& chart, int grid_n = 0,
                const QuadratureOptions& opts = {});

struct NondegEntry {
  int m = 0;
  double partial = 0.0;
  double partial_error = 0.0;
  double tate = 0.0;
  double ratio = 0.0;
};

// partial_height(mP, D) / tate_height(mP) for m = 1..m_max. DegenerateDenominator
// when a Tate height vanishes (torsion).
std::vector<NondegEntry> nondeg_ratio(const EllipticSurface& s, const Section& p, const Disc& chart, int m_max,
                                      const QuadratureOptions& opts = {}, const TateOptions& tate = {4, 20000});

// Output formats.
void write_density_csv(std::ostream& out, const DensityGrid& g);
void write_density_svg(std::ostream& out, const DensityGrid& g);

}  // namespace bh
