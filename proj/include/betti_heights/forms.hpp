#pragma once

// Holomorphic expressions in one variable, Fubini-Study pullback densities
// on products of projective lines, and generic partial heights.

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>

#include "betti_heights/heights.hpp"

namespace bh {

class HolExpr {
 public:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow };

  HolExpr() : HolExpr(constant(BigRational(0))) {}
  static HolExpr constant(const BigRational& c);
  static HolExpr variable();
  static HolExpr pow(const HolExpr& base, long exponent);

  friend HolExpr operator+(const HolExpr& a, const HolExpr& b);
  friend HolExpr operator-(const HolExpr& a, const HolExpr& b);
  friend HolExpr operator*(const HolExpr& a, const HolExpr& b);
  // InvalidArgument when the denominator is identically zero.
  friend HolExpr operator/(const HolExpr& a, const HolExpr& b);

  Op op() const;
  bool is_constant() const;  // no variable below this node
  std::optional<BigRational> constant_value() const;

  // PoleAtPoint when a denominator vanishes at z.
  cplx eval(cplx z) const;
  // PoleAtPoint unless every denominator is zero-free on the closed disc
  // (argument principle on the boundary circle, innermost denominators first).
  void require_pole_free(const Disc& d) const;

  std::string to_string() const;
  nlohmann::json to_json() const;
  static HolExpr from_json(const nlohmann::json& j);

  struct Node;

 private:
  explicit HolExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static HolExpr make_node(Op op, const HolExpr& a, const HolExpr& b, long exponent = 0);
  std::shared_ptr<const Node> node_;
  friend HolExpr hol_derive(const HolExpr& e);
};

// Symbolic derivative with constant folding.
HolExpr hol_derive(const HolExpr& e);

// Parses "z^n / (1 - z)", "n^(-n) * z^n" etc. Identifiers other than z are
// looked up in `params` (integers, usable in exponents and constants).
HolExpr parse_holexpr(std::string_view text, const std::map<std::string, long>& params = {});

// A map from a chart of C into P^1 x ... x P^1 in affine coordinates.
class ProductMap {
 public:
  ProductMap() = default;
  explicit ProductMap(std::vector<HolExpr> components, std::vector<double> weights = {});

  const std::vector<HolExpr>& components() const { return f_; }
  const std::vector<HolExpr>& derivatives() const { return df_; }
  const std::vector<double>& weights() const { return w_; }
  std::size_t size() const { return f_.size(); }

  nlohmann::json to_json() const;
  static ProductMap from_json(const nlohmann::json& j);

 private:
  std::vector<HolExpr> f_, df_;
  std::vector<double> w_;
};

// sum_k w_k |f_k'(z)|^2 / (1 + |f_k(z)|^2)^2, against i dz ^ dzbar.
double fs_density(const ProductMap& m, cplx z);
// The same for a single factor.
double fs_density_factor(const ProductMap& m, std::size_t k, cplx z);

// Integral of fs_density i dz^dzbar = 2 fs_density du dv over the disc:
// Gauss-Legendre radial panels times the trapezoid rule in the angle, both
// doubled until successive values differ by less than opts.tol.
HeightReport generic_partial_height(const ProductMap& m, const Disc& d, const QuadratureOptions& opts = {});

enum class Schedule { Decay, Unit };  // a_n = n^-n, a_n = 1

struct SweepRow {
  int n = 0;
  double a_n = 0.0;
  double closed_form = 0.0;
  double quadrature = 0.0;
  double quadrature_error = 0.0;
  double abs_err = 0.0;
};

// 2 pi r^2/(1 + r^2) + 2 pi n a^2 r^2n / (1 + a^2 r^2n): partial height of
// z -> (z, a z^n) on the disc of radius r.
double example_closed_form(int n, double a, double r);

std::vector<SweepRow> counterexample_sweep(int n_max, double r, Schedule schedule, const QuadratureOptions& opts = {});

}  // namespace bh
