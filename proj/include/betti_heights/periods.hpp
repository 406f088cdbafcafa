#pragma once

// Fiberwise analytic data of y^2 = x^3 + a x + b: roots, the period lattice
// of dx/y via the complex AGM, Weierstrass functions and elliptic logs, and
// the continuation of a period basis over a disc in the base.
//
// Normalisation: the lattice is the period lattice of dx/y and z = int dx/y,
// so the uniformisation is x = 4 P(z), y = 4 P'(z) with P the Weierstrass
// function of that lattice.

#include <array>
#include <optional>
#include <vector>

#include "betti_heights/weierstrass.hpp"

namespace bh {

struct Disc {
  cplx center;
  double radius = 0.0;

  bool contains(cplx t, double slack = 0.0) const { return std::abs(t - center) <= radius + slack; }
};

using RootTriple = std::array<cplx, 3>;

// Roots of X^3 + aX + b, Newton-polished; NearSingularFiber when two roots
// are closer than 1e-8 * scale.
RootTriple cubic_roots(cplx a, cplx b);
RootTriple fiber_roots(const EllipticSurface& s, cplx t, Precision precision = Precision::Double);

// Complex AGM with the optimal square-root branch.
cplx agm(cplx a, cplx b);

struct FiberLattice {
  cplx t;
  cplx w1, w2;

  cplx tau() const { return w2 / w1; }
  // Im(conj(w1) w2), positive for an oriented basis.
  double covolume() const { return (std::conj(w1) * w2).imag(); }
};

// Oriented basis of the dx/y lattice at the fiber (a, b). The basis is
// certified against the Eisenstein invariants of the curve.
FiberLattice lattice_from_coefficients(cplx a, cplx b, cplx t = 0.0);
FiberLattice fiber_periods(const EllipticSurface& s, cplx t, Precision precision = Precision::Double);

// Lagrange-Gauss reduced oriented basis of the same lattice.
std::pair<cplx, cplx> reduce_basis(cplx w1, cplx w2);

struct Invariants {
  cplx g2, g3;
};
// Eisenstein invariants of the lattice Z w1 + Z w2 (q-expansions).
Invariants lattice_invariants(cplx w1, cplx w2);

struct PValue {
  cplx p, dp;
};
// P and P' for the lattice Z w1 + Z w2.
PValue weierstrass_p(cplx z, cplx w1, cplx w2);

// The fiber point (4 P(z), 4 P'(z)).
std::pair<cplx, cplx> point_from_log(cplx z, const FiberLattice& lattice);

// Representative of z mod the lattice with real coordinates in [-1/2, 1/2).
cplx reduce_mod_lattice(cplx z, const FiberLattice& lattice);

// Real coordinates (b1, b2) with z = b1 w1 + b2 w2.
std::array<double, 2> lattice_coordinates(cplx z, const FiberLattice& lattice);

// Elliptic logarithm of (x, y) on y^2 = x^3 + a x + b, reduced mod the lattice.
// A nearby starting value (e.g. from a neighbouring fiber) skips the Landen
// initial guess. PointNearIdentity when the point is too close to O.
cplx elliptic_log(cplx a, cplx b, cplx x, cplx y, const FiberLattice& lattice,
                  std::optional<cplx> guess = std::nullopt);
cplx elliptic_log(const EllipticSurface& s, cplx t, std::pair<cplx, cplx> point,
                  const FiberLattice& lattice);

// Re-expresses a freshly computed basis (w1, w2) in the unimodular frame
// closest to the reference basis. ContinuationAmbiguity if the best candidate
// is not within half the lattice mesh.
FiberLattice align_basis(const FiberLattice& fresh, cplx ref1, cplx ref2);

// Cell-centred n x n grid over the bounding square of a disc, row-major
// (index = j * n + i, i along Re t, j along Im t).
struct Grid {
  Disc disc;
  int n = 0;
  double h = 0.0;
  // Nodes needed for quadrature and its finite-difference stencils.
  std::vector<char> active;

  cplx node(int i, int j) const {
    return disc.center + cplx(-disc.radius + (i + 0.5) * h, -disc.radius + (j + 0.5) * h);
  }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n + i; }
  std::size_t size() const { return static_cast<std::size_t>(n) * n; }
  bool is_active(int i, int j) const {
    return i >= 0 && j >= 0 && i < n && j < n && active[index(i, j)];
  }
  // Exact area of cell (i, j) intersected with the disc.
  double cell_weight(int i, int j) const;
};

Grid make_grid(const Disc& disc, int n);

// Exact area of [x0, x1] x [y0, y1] intersected with the disc.
double rect_disc_area(double x0, double x1, double y0, double y1, const Disc& disc);

struct LatticeField {
  const EllipticSurface* surface = nullptr;
  Grid grid;
  FiberLattice center;
  std::vector<FiberLattice> lattices;  // per node; inactive nodes hold zeros
  std::vector<cplx> a_values, b_values;
  // Continuation order and tree (parent of the first node is -1).
  std::vector<int> order;
  std::vector<int> parent;
  Precision precision = Precision::Double;

  const Disc& chart() const { return grid.disc; }
};

// Throws ChartHitsBadFiber if a bad fiber lies in the closed chart.
LatticeField lattice_continue(const EllipticSurface& s, const Disc& chart, int grid_n,
                              Precision precision = Precision::Double);

struct BettiPath {
  std::vector<std::array<double, 2>> beta;  // per node, continuously lifted
  std::vector<cplx> z;                      // elliptic log per node
  bool zero = false;
};

// SectionHitsIdentity if x(P) has a pole in the closed chart; UnwrapFailure
// if neighbouring lifts differ by 1/2 or more.
BettiPath betti_path(const EllipticSurface& s, const Section& p, const LatticeField& field);

// Continues a basis along a polyline of base points and returns the final
// basis; used to check the absence of monodromy on simply connected charts.
FiberLattice transport_basis(const EllipticSurface& s, const std::vector<cplx>& path,
                             const FiberLattice& start, int substeps = 8);

// Poles of x(P) in the closed disc (numerical roots of den x within slack).
std::vector<cplx> section_poles_in(const Section& p, const Disc& disc, double slack = 0.0);

}  // namespace bh
