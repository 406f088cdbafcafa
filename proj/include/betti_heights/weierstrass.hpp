#pragma once

// Elliptic surfaces y^2 = x^3 + a(t) x + b(t) over Q(t), their sections and
// the exact group law, naive heights deg x(P), and canonical heights by
// Tate's doubling limit.

#include <optional>
#include <vector>

#include "betti_heights/exactalg.hpp"

namespace bh {

struct BadFiber {
  cplx t;
  // Another finite bad fiber lies within 1e-6 (possible multiple root).
  bool clustered = false;
};

class Section {
 public:
  static Section zero() { return Section(); }
  static Section affine(RatFun x, RatFun y) { return Section(std::move(x), std::move(y)); }

  bool is_zero() const noexcept { return zero_; }
  const RatFun& x() const;
  const RatFun& y() const;

  friend bool operator==(const Section& p, const Section& q) {
    if (p.zero_ || q.zero_) return p.zero_ == q.zero_;
    return p.x_ == q.x_ && p.y_ == q.y_;
  }

  std::string to_string() const;

 private:
  Section() = default;
  Section(RatFun x, RatFun y) : zero_(false), x_(std::move(x)), y_(std::move(y)) {}

  bool zero_ = true;
  RatFun x_, y_;
};

class EllipticSurface {
 public:
  // Throws SingularFamily when 4a^3 + 27b^2 vanishes identically.
  EllipticSurface(RatFun a, RatFun b);

  const RatFun& a() const noexcept { return a_; }
  const RatFun& b() const noexcept { return b_; }
  // -16 (4a^3 + 27b^2)
  const RatFun& discriminant() const noexcept { return disc_; }
  RatFun j_invariant() const;
  bool is_isotrivial() const { return j_invariant().is_constant(); }

  // Finite bad fibers: discriminant zeros and poles of a, b.
  const std::vector<BadFiber>& bad_fibers() const noexcept { return bad_; }
  bool bad_at_infinity() const noexcept { return bad_inf_; }

  // Weight k of the model at infinity in w = 1/t: a_w = a(1/w) w^{4k},
  // b_w = b(1/w) w^{6k} with k minimal making both regular at w = 0.
  int infinity_weight() const noexcept { return inf_k_; }
  EllipticSurface infinity_model() const;
  Section section_at_infinity(const Section& p) const;

  bool contains(const Section& p) const;

  const NumericRatFun& a_numeric() const noexcept { return a_num_; }
  const NumericRatFun& b_numeric() const noexcept { return b_num_; }

 private:
  RatFun a_, b_, disc_;
  std::vector<BadFiber> bad_;
  bool bad_inf_ = false;
  int inf_k_ = 0;
  NumericRatFun a_num_, b_num_;
};

inline EllipticSurface surface_new(RatFun a, RatFun b) { return EllipticSurface(std::move(a), std::move(b)); }

Section section_neg(const Section& p);
Section section_add(const EllipticSurface& s, const Section& p, const Section& q);
Section section_double(const EllipticSurface& s, const Section& p);
Section section_mul(const EllipticSurface& s, long m, const Section& p);

// deg x(P) as a map P^1 -> P^1; 0 for the zero section.
long naive_height(const EllipticSurface& s, const Section& p);

struct TateOptions {
  int n_iters = 6;
  long degree_cap = 20000;
};

struct TateReport {
  double value = 0.0;
  // |estimate(n) - estimate(n-1)|
  double error = 0.0;
  // naive[k] = deg x(2^k P), estimates[k] = naive[k] / 4^k, k = 0..n
  std::vector<long> naive;
  std::vector<double> estimates;
  // max_k |h(2^{k+1} P) - 4 h(2^k P)| over the run
  long quasi_constant = 0;
  // First k with 2^k P = 0, if the doubling chain hit the identity.
  std::optional<int> torsion_at;
};

// Degrees of x(2^k P) are computed exactly through x-only doubling on
// integer polynomial pairs.
TateReport tate_height(const EllipticSurface& s, const Section& p, const TateOptions& opts = {});

// x-coordinate of 2Q from x(Q), or nullopt when 2Q is the identity.
std::optional<RatFun> double_x(const EllipticSurface& s, const RatFun& x);

}  // namespace bh
