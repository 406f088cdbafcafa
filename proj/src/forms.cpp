#include "betti_heights/forms.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "betti_heights/error.hpp"

namespace bh {

struct HolExpr::Node {
  Op op;
  BigRational value;  // Const
  cplx cvalue;        // Const, as a double
  long exponent = 0;  // Pow
  HolExpr a, b;
  bool has_var = false;

  Node(Op o, BigRational v)
      : op(o), value(std::move(v)), cvalue(static_cast<double>(to_long_double(value))), a(nullptr), b(nullptr) {}
  Node(Op o, HolExpr x, HolExpr y, long e)
      : op(o), exponent(e), a(std::move(x)), b(std::move(y)), has_var(!a.is_constant() || !b.is_constant()) {}
};

namespace {

using Op = HolExpr::Op;
constexpr double kPi = std::numbers::pi;

BigRational rational_pow(const BigRational& base, long e) {
  if (e < 0) {
    if (base == 0) throw Error(ErrorKind::DivisionByZero, "0 raised to a negative power");
    return rational_pow(1 / base, -e);
  }
  BigRational r = 1, b = base;
  for (unsigned long k = static_cast<unsigned long>(e); k; k >>= 1) {
    if (k & 1) r *= b;
    b *= b;
  }
  return r;
}

bool identically_zero(const HolExpr& e) {
  if (const auto c = e.constant_value()) return *c == 0;
  static const cplx probes[] = {{0.3137, 0.1711}, {-0.7213, 0.5519}, {1.9123, -0.8841}, {-2.417, -1.3339}};
  for (cplx z : probes) {
    try {
      if (std::abs(e.eval(z)) != 0.0) return false;
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

}  // namespace

HolExpr HolExpr::make_node(Op op, const HolExpr& a, const HolExpr& b, long exponent) {
  return HolExpr(std::make_shared<const Node>(op, a, b, exponent));
}

HolExpr HolExpr::constant(const BigRational& c) {
  BigRational v = c;
  v.canonicalize();
  return HolExpr(std::make_shared<const Node>(Op::Const, v));
}

HolExpr HolExpr::variable() {
  auto n = std::make_shared<Node>(Op::Var, BigRational(0));
  n->has_var = true;
  return HolExpr(std::shared_ptr<const Node>(std::move(n)));
}

HolExpr::Op HolExpr::op() const { return node_->op; }
bool HolExpr::is_constant() const { return !node_ || !node_->has_var; }

std::optional<BigRational> HolExpr::constant_value() const {
  if (node_->op == Op::Const) return node_->value;
  return std::nullopt;
}

HolExpr operator+(const HolExpr& a, const HolExpr& b) {
  const auto ca = a.constant_value(), cb = b.constant_value();
  if (ca && cb) return HolExpr::constant(*ca + *cb);
  if (ca && *ca == 0) return b;
  if (cb && *cb == 0) return a;
  return HolExpr::make_node(Op::Add, a, b);
}

HolExpr operator-(const HolExpr& a, const HolExpr& b) {
  const auto ca = a.constant_value(), cb = b.constant_value();
  if (ca && cb) return HolExpr::constant(*ca - *cb);
  if (cb && *cb == 0) return a;
  return HolExpr::make_node(Op::Sub, a, b);
}

HolExpr operator*(const HolExpr& a, const HolExpr& b) {
  const auto ca = a.constant_value(), cb = b.constant_value();
  if (ca && cb) return HolExpr::constant(*ca * *cb);
  if ((ca && *ca == 0) || (cb && *cb == 0)) return HolExpr::constant(0);
  if (ca && *ca == 1) return b;
  if (cb && *cb == 1) return a;
  return HolExpr::make_node(Op::Mul, a, b);
}

HolExpr operator/(const HolExpr& a, const HolExpr& b) {
  if (identically_zero(b)) throw Error(ErrorKind::InvalidArgument, "division by an identically zero expression");
  const auto ca = a.constant_value(), cb = b.constant_value();
  if (ca && cb) return HolExpr::constant(*ca / *cb);
  if (ca && *ca == 0) return HolExpr::constant(0);
  if (cb && *cb == 1) return a;
  return HolExpr::make_node(Op::Div, a, b);
}

HolExpr HolExpr::pow(const HolExpr& base, long exponent) {
  if (exponent == 0) return constant(1);
  if (exponent == 1) return base;
  if (const auto c = base.constant_value()) return constant(rational_pow(*c, exponent));
  if (exponent < 0 && identically_zero(base))
    throw Error(ErrorKind::InvalidArgument, "negative power of an identically zero expression");
  return make_node(Op::Pow, base, constant(0), exponent);
}

cplx HolExpr::eval(cplx z) const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const:
      return n.cvalue;
    case Op::Var:
      return z;
    case Op::Add:
      return n.a.eval(z) + n.b.eval(z);
    case Op::Sub:
      return n.a.eval(z) - n.b.eval(z);
    case Op::Mul:
      return n.a.eval(z) * n.b.eval(z);
    case Op::Div: {
      const cplx d = n.b.eval(z);
      if (std::abs(d) <= 1e-15) throw Error(ErrorKind::PoleAtPoint, "denominator vanishes at the evaluation point");
      return n.a.eval(z) / d;
    }
    case Op::Pow: {
      const cplx base = n.a.eval(z);
      if (n.exponent < 0 && std::abs(base) <= 1e-15)
        throw Error(ErrorKind::PoleAtPoint, "negative power of a vanishing base");
      cplx r = 1.0, b = n.exponent < 0 ? 1.0 / base : base;
      for (unsigned long k = static_cast<unsigned long>(std::abs(n.exponent)); k; k >>= 1) {
        if (k & 1) r *= b;
        b *= b;
      }
      return r;
    }
  }
  return 0.0;
}

namespace {

// Winding number of g around 0 along the circle; g must be pole-free on the disc.
long winding_number(const HolExpr& g, const Disc& d) {
  for (int m = 1024; m <= (1 << 17); m *= 2) {
    std::vector<cplx> v(static_cast<std::size_t>(m));
    double peak = 0.0;
    for (int k = 0; k < m; ++k) {
      v[static_cast<std::size_t>(k)] = g.eval(d.center + std::polar(d.radius, 2.0 * kPi * k / m));
      peak = std::max(peak, std::abs(v[static_cast<std::size_t>(k)]));
    }
    double total = 0.0;
    bool resolved = true;
    for (int k = 0; k < m; ++k) {
      const cplx a = v[static_cast<std::size_t>(k)], b = v[static_cast<std::size_t>((k + 1) % m)];
      if (std::abs(a) <= 1e-12 * peak) throw Error(ErrorKind::PoleAtPoint, "a denominator vanishes on the disc boundary");
      const double step = std::arg(b / a);
      if (std::abs(step) > 0.5) resolved = false;
      total += step;
    }
    if (resolved) return std::lround(total / (2.0 * kPi));
  }
  throw Error(ErrorKind::PoleAtPoint, "could not resolve a denominator on the disc boundary");
}

}  // namespace

void HolExpr::require_pole_free(const Disc& d) const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const:
    case Op::Var:
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
      n.a.require_pole_free(d);
      n.b.require_pole_free(d);
      return;
    case Op::Div:
      n.a.require_pole_free(d);
      n.b.require_pole_free(d);
      if (!n.b.is_constant() && winding_number(n.b, d) != 0)
        throw Error(ErrorKind::PoleAtPoint, "a denominator has zeros in the disc");
      return;
    case Op::Pow:
      n.a.require_pole_free(d);
      if (n.exponent < 0 && !n.a.is_constant() && winding_number(n.a, d) != 0)
        throw Error(ErrorKind::PoleAtPoint, "a negative power has a vanishing base in the disc");
      return;
  }
}

HolExpr hol_derive(const HolExpr& e) {
  const HolExpr::Node& n = *e.node_;
  switch (n.op) {
    case Op::Const:
      return HolExpr::constant(0);
    case Op::Var:
      return HolExpr::constant(1);
    case Op::Add:
      return hol_derive(n.a) + hol_derive(n.b);
    case Op::Sub:
      return hol_derive(n.a) - hol_derive(n.b);
    case Op::Mul:
      return hol_derive(n.a) * n.b + n.a * hol_derive(n.b);
    case Op::Div:
      return (hol_derive(n.a) * n.b - n.a * hol_derive(n.b)) / HolExpr::pow(n.b, 2);
    case Op::Pow:
      return HolExpr::constant(n.exponent) * HolExpr::pow(n.a, n.exponent - 1) * hol_derive(n.a);
  }
  return HolExpr::constant(0);
}

std::string HolExpr::to_string() const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const: {
      const std::string s = format_rational(n.value);
      return n.value < 0 || s.find('/') != std::string::npos ? "(" + s + ")" : s;
    }
    case Op::Var:
      return "z";
    case Op::Add:
      return "(" + n.a.to_string() + " + " + n.b.to_string() + ")";
    case Op::Sub:
      return "(" + n.a.to_string() + " - " + n.b.to_string() + ")";
    case Op::Mul:
      return n.a.to_string() + "*" + n.b.to_string();
    case Op::Div:
      return n.a.to_string() + "/(" + n.b.to_string() + ")";
    case Op::Pow:
      return "(" + n.a.to_string() + ")^" + (n.exponent < 0 ? "(" + std::to_string(n.exponent) + ")" : std::to_string(n.exponent));
  }
  return "";
}

nlohmann::json HolExpr::to_json() const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const:
      return {{"op", "const"}, {"value", format_rational(n.value)}};
    case Op::Var:
      return {{"op", "var"}};
    case Op::Add:
      return {{"op", "add"}, {"args", {n.a.to_json(), n.b.to_json()}}};
    case Op::Sub:
      return {{"op", "sub"}, {"args", {n.a.to_json(), n.b.to_json()}}};
    case Op::Mul:
      return {{"op", "mul"}, {"args", {n.a.to_json(), n.b.to_json()}}};
    case Op::Div:
      return {{"op", "div"}, {"args", {n.a.to_json(), n.b.to_json()}}};
    case Op::Pow:
      return {{"op", "pow"}, {"args", {n.a.to_json()}}, {"exp", n.exponent}};
  }
  return {};
}

namespace {

HolExpr from_json_at(const nlohmann::json& j, const std::string& ptr) {
  auto fail = [&](const std::string& what) { throw Error(ErrorKind::Validation, ptr + ": " + what); };
  if (!j.is_object() || !j.contains("op") || !j["op"].is_string()) fail("expected an object with a string \"op\"");
  const std::string op = j["op"];
  auto arg = [&](std::size_t k) {
    if (!j.contains("args") || !j["args"].is_array() || j["args"].size() <= k) fail("missing args/" + std::to_string(k));
    return from_json_at(j["args"][k], ptr + "/args/" + std::to_string(k));
  };
  if (op == "const") {
    if (!j.contains("value")) fail("missing value");
    const auto& v = j["value"];
    if (v.is_string()) {
      try {
        return HolExpr::constant(parse_rational(v.get<std::string>()));
      } catch (const std::exception&) {
        fail("value is not a rational number");
      }
    }
    if (v.is_number_integer()) return HolExpr::constant(BigRational(v.get<long>()));
    fail("value must be a rational string");
  }
  if (op == "var") return HolExpr::variable();
  if (op == "add") return arg(0) + arg(1);
  if (op == "sub") return arg(0) - arg(1);
  if (op == "mul") return arg(0) * arg(1);
  if (op == "div") {
    const HolExpr a = arg(0), b = arg(1);
    try {
      return a / b;
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  if (op == "pow") {
    if (!j.contains("exp") || !j["exp"].is_number_integer()) fail("pow needs an integer \"exp\"");
    return HolExpr::pow(arg(0), j["exp"].get<long>());
  }
  fail("unknown op \"" + op + "\"");
  return HolExpr();
}

// Recursive-descent parser for holomorphic expressions.
class ExprParser {
 public:
  ExprParser(std::string_view s, const std::map<std::string, long>& params) : s_(s), params_(params) {}

  HolExpr parse() {
    HolExpr e = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    throw Error(ErrorKind::InvalidArgument, "expression \"" + std::string(s_) + "\" at " + std::to_string(pos_) + ": " + what);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  HolExpr expr() {
    HolExpr e = term();
    for (;;) {
      if (eat('+'))
        e = e + term();
      else if (eat('-'))
        e = e - term();
      else
        return e;
    }
  }
  bool starts_atom() {
    skip();
    if (pos_ >= s_.size()) return false;
    const char c = s_[pos_];
    return c == '(' || std::isalnum(static_cast<unsigned char>(c)) || c == '.';
  }
  HolExpr term() {
    HolExpr e = unary();
    for (;;) {
      if (eat('*'))
        e = e * unary();
      else if (eat('/'))
        e = e / unary();
      else if (starts_atom())
        e = e * power();
      else
        return e;
    }
  }
  HolExpr unary() {
    if (eat('-')) return HolExpr::constant(0) - unary();
    if (eat('+')) return unary();
    return power();
  }
  HolExpr power() {
    HolExpr base = atom();
    if (eat('^')) {
      const HolExpr ex = unary();
      const auto c = ex.constant_value();
      if (!c || c->get_den() != 1 || !c->get_num().fits_slong_p()) error("exponent must be an integer constant");
      return HolExpr::pow(base, c->get_num().get_si());
    }
    return base;
  }
  HolExpr atom() {
    skip();
    if (eat('(')) {
      HolExpr e = expr();
      if (!eat(')')) error("expected ')'");
      return e;
    }
    if (pos_ >= s_.size()) error("unexpected end");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
      return HolExpr::constant(parse_rational(s_.substr(start, pos_ - start)));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id(s_.substr(start, pos_ - start));
      if (id == "z") return HolExpr::variable();
      const auto it = params_.find(id);
      if (it == params_.end()) error("unknown identifier '" + id + "'");
      return HolExpr::constant(BigRational(it->second));
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  const std::map<std::string, long>& params_;
  std::size_t pos_ = 0;
};

}  // namespace

HolExpr HolExpr::from_json(const nlohmann::json& j) { return from_json_at(j, ""); }

HolExpr parse_holexpr(std::string_view text, const std::map<std::string, long>& params) {
  return ExprParser(text, params).parse();
}

// ---------------------------------------------------------------- product maps

ProductMap::ProductMap(std::vector<HolExpr> components, std::vector<double> weights)
    : f_(std::move(components)), w_(std::move(weights)) {
  if (f_.empty()) throw Error(ErrorKind::InvalidArgument, "a product map needs at least one component");
  if (w_.empty()) w_.assign(f_.size(), 1.0);
  if (w_.size() != f_.size()) throw Error(ErrorKind::InvalidArgument, "one weight per component");
  for (double w : w_)
    if (!(w > 0.0)) throw Error(ErrorKind::InvalidArgument, "Fubini-Study weights must be positive");
  for (const auto& f : f_) df_.push_back(hol_derive(f));
}

nlohmann::json ProductMap::to_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& f : f_) comps.push_back(f.to_json());
  return {{"components", comps}, {"weights", w_}};
}

namespace {

// Prefixes the pointer of a nested validation message with `ptr`.
std::string nest_pointer(const std::string& ptr, const Error& e) {
  std::string msg = e.what();
  const std::string kind = std::string(to_string(e.kind())) + ": ";
  if (msg.rfind(kind, 0) == 0) msg = msg.substr(kind.size());
  if (!msg.empty() && (msg[0] == '/' || msg.rfind(": ", 0) == 0)) return ptr + msg;
  return ptr + ": " + msg;
}

}  // namespace

ProductMap ProductMap::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("components") || !j["components"].is_array())
    throw Error(ErrorKind::Validation, "/components: expected an array");
  std::vector<HolExpr> comps;
  for (std::size_t k = 0; k < j["components"].size(); ++k) {
    const auto& c = j["components"][k];
    const std::string ptr = "/components/" + std::to_string(k);
    if (c.is_string()) {
      try {
        comps.push_back(parse_holexpr(c.get<std::string>()));
      } catch (const Error& e) {
        throw Error(ErrorKind::Validation, nest_pointer(ptr, e));
      }
    } else {
      try {
        comps.push_back(HolExpr::from_json(c));
      } catch (const Error& e) {
        throw Error(ErrorKind::Validation, nest_pointer(ptr, e));
      }
    }
  }
  std::vector<double> w;
  if (j.contains("weights")) {
    if (!j["weights"].is_array()) throw Error(ErrorKind::Validation, "/weights: expected an array");
    for (const auto& x : j["weights"]) {
      if (!x.is_number()) throw Error(ErrorKind::Validation, "/weights: expected numbers");
      w.push_back(x.get<double>());
    }
  }
  return ProductMap(std::move(comps), std::move(w));
}

double fs_density_factor(const ProductMap& m, std::size_t k, cplx z) {
  const cplx f = m.components()[k].eval(z);
  const cplx df = m.derivatives()[k].eval(z);
  const double den = 1.0 + std::norm(f);
  return m.weights()[k] * std::norm(df) / (den * den);
}

double fs_density(const ProductMap& m, cplx z) {
  double s = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) s += fs_density_factor(m, k, z);
  return s;
}

HeightReport generic_partial_height(const ProductMap& m, const Disc& d, const QuadratureOptions& opts) {
  if (!(d.radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "disc radius must be positive");
  if (opts.max_levels < 2) throw Error(ErrorKind::InvalidArgument, "need at least two levels");
  for (const auto& f : m.components()) f.require_pole_free(d);
  using GL = boost::math::quadrature::gauss<double, 10>;
  HeightReport r;
  int panels = 2, angular = std::max(16, opts.base_n);
  for (int level = 0; level < opts.max_levels; ++level, panels *= 2, angular *= 2) {
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double a = d.radius * p / panels, b = d.radius * (p + 1) / panels;
      total += GL::integrate(
          [&](double rad) {
            double ring = 0.0;
            for (int k = 0; k < angular; ++k)
              ring += fs_density(m, d.center + std::polar(rad, 2.0 * kPi * (k + 0.5) / angular));
            return ring * rad * (2.0 * kPi / angular);
          },
          a, b);
    }
    const double v = 2.0 * total;  // i dz ^ dzbar = 2 du dv
    r.levels.push_back(angular);
    r.values.push_back(v);
    r.value = v;
    if (level > 0) {
      r.error = std::abs(v - r.values[r.values.size() - 2]);
      if (r.error < opts.tol) return r;
    }
  }
  throw Error(ErrorKind::QuadratureStalled, "generic partial height did not reach tol " + std::to_string(opts.tol));
}

double example_closed_form(int n, double a, double r) {
  const double r2 = r * r;
  const double q = a * a * std::pow(r, 2 * n);
  return 2 * kPi * r2 / (1 + r2) + 2 * kPi * n * q / (1 + q);
}

std::vector<SweepRow> counterexample_sweep(int n_max, double r, Schedule schedule, const QuadratureOptions& opts) {
  if (n_max < 1) throw Error(ErrorKind::InvalidArgument, "n_max must be at least 1");
  if (!(r > 0.0 && r < 1.0)) throw Error(ErrorKind::InvalidArgument, "r must lie in (0, 1)");
  if (schedule == Schedule::Unit && n_max > 12) throw Error(ErrorKind::InvalidArgument, "n_max <= 12 for a_n = 1");
  std::vector<SweepRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    const BigRational a = schedule == Schedule::Decay ? 1 / rational_pow(BigRational(n), n) : BigRational(1);
    const ProductMap m({HolExpr::variable(), HolExpr::constant(a) * HolExpr::pow(HolExpr::variable(), n)});
    const HeightReport h = generic_partial_height(m, {0.0, r}, opts);
    SweepRow row;
    row.n = n;
    row.a_n = static_cast<double>(to_long_double(a));
    row.closed_form = example_closed_form(n, row.a_n, r);
    row.quadrature = h.value;
    row.quadrature_error = h.error;
    row.abs_err = std::abs(h.value - row.closed_form);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bh
