#include "betti_heights/cli.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "betti_heights/brody.hpp"
#include "betti_heights/error.hpp"
#include "betti_heights/forms.hpp"
#include "betti_heights/heights.hpp"

#ifndef BETTI_HEIGHTS_VERSION
#define BETTI_HEIGHTS_VERSION "0.0.0"
#endif

namespace bh::cli {

using nlohmann::json;

const char* version() { return BETTI_HEIGHTS_VERSION; }

std::string job_hash(const json& canonical_job) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : canonical_job.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

json ResultRecord::to_json() const {
  return {{"hash", hash}, {"command", command}, {"version", version}, {"timestamp", timestamp}, {"result", result}};
}

ResultRecord ResultRecord::from_json(const json& j) {
  ResultRecord r;
  r.hash = j.at("hash").get<std::string>();
  r.command = j.at("command").get<std::string>();
  r.version = j.at("version").get<std::string>();
  r.timestamp = j.at("timestamp").get<std::string>();
  r.result = j.at("result");
  return r;
}

std::optional<ResultRecord> ResultStore::lookup(const std::string& hash, const std::string& ver) {
  skipped_ = 0;
  std::ifstream in(path_);
  if (!in) return std::nullopt;
  std::optional<ResultRecord> found;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      ResultRecord r = ResultRecord::from_json(json::parse(line));
      if (r.hash == hash && r.version == ver) found = std::move(r);
    } catch (const std::exception&) {
      ++skipped_;
    }
  }
  return found;
}

void ResultStore::append(const ResultRecord& record) const {
  const std::string line = record.to_json().dump() + "\n";
  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw Error(ErrorKind::InvalidArgument, "cannot open cache file " + path_);
  const ssize_t written = ::write(fd, line.data(), line.size());
  ::close(fd);
  if (written != static_cast<ssize_t>(line.size()))
    throw Error(ErrorKind::InvalidArgument, "short write to cache file " + path_);
}

namespace {

// Validation error carrying a JSON pointer into the config.
class ConfigError : public Error {
 public:
  ConfigError(std::string pointer, const std::string& what)
      : Error(ErrorKind::Validation, (pointer.empty() ? std::string("(root)") : pointer) + ": " + what),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

const json& need(const json& obj, const std::string& key, const std::string& ptr) {
  if (!obj.is_object()) throw ConfigError(ptr, "expected an object");
  if (!obj.contains(key)) throw ConfigError(ptr + "/" + key, "missing required field");
  return obj.at(key);
}

double get_num(const json& obj, const std::string& key, const std::string& ptr, double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(ptr + "/" + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& key, const std::string& ptr, int fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(ptr + "/" + key, "expected an integer");
  return v.get<int>();
}

const json& block(const json& cfg, const std::string& key) {
  static const json empty = json::object();
  if (!cfg.contains(key)) return empty;
  if (!cfg.at(key).is_object()) throw ConfigError("/" + key, "expected an object");
  return cfg.at(key);
}

RatFun ratfun_at(const json& v, const std::string& ptr) {
  std::string text;
  if (v.is_string())
    text = v.get<std::string>();
  else if (v.is_number_integer())
    text = std::to_string(v.get<long>());
  else
    throw ConfigError(ptr, "expected a rational function string");
  try {
    return parse_ratfun(text);
  } catch (const Error& e) {
    throw ConfigError(ptr, e.what());
  }
}

cplx complex_at(const json& v, const std::string& ptr) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(ptr, "expected a number or [re, im]");
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

Disc disc_at(const json& v, const std::string& ptr) {
  Disc d;
  d.center = complex_at(need(v, "center", ptr), ptr + "/center");
  const json& r = need(v, "radius", ptr);
  if (!r.is_number() || !(r.get<double>() > 0)) throw ConfigError(ptr + "/radius", "expected a positive number");
  d.radius = r.get<double>();
  return d;
}

struct SurfaceJob {
  std::optional<EllipticSurface> surface;
  std::vector<Section> sections;
  std::vector<Disc> discs;
};

SurfaceJob load_surface_job(const json& cfg, bool need_sections, bool need_discs) {
  SurfaceJob job;
  const json& sj = need(cfg, "surface", "");
  const RatFun a = ratfun_at(need(sj, "a", "/surface"), "/surface/a");
  const RatFun b = ratfun_at(need(sj, "b", "/surface"), "/surface/b");
  try {
    job.surface.emplace(a, b);
  } catch (const Error& e) {
    throw ConfigError("/surface", e.what());
  }
  const EllipticSurface& s = *job.surface;

  if (need_sections || cfg.contains("sections")) {
    const json& secs = need(cfg, "sections", "");
    if (!secs.is_array()) throw ConfigError("/sections", "expected an array");
    if (secs.empty()) throw ConfigError("/sections", "at least one section is required");
    for (std::size_t i = 0; i < secs.size(); ++i) {
      const std::string ptr = "/sections/" + std::to_string(i);
      const json& v = secs[i];
      if (v.is_string() && v.get<std::string>() == "zero") {
        job.sections.push_back(Section::zero());
        continue;
      }
      const Section p =
          Section::affine(ratfun_at(need(v, "x", ptr), ptr + "/x"), ratfun_at(need(v, "y", ptr), ptr + "/y"));
      if (!s.contains(p)) throw ConfigError(ptr, "section does not lie on the surface");
      job.sections.push_back(p);
    }
  }
  if (need_discs || cfg.contains("discs")) {
    const json& ds = need(cfg, "discs", "");
    if (!ds.is_array()) throw ConfigError("/discs", "expected an array");
    if (ds.empty()) throw ConfigError("/discs", "at least one disc is required");
    for (std::size_t k = 0; k < ds.size(); ++k) {
      const std::string ptr = "/discs/" + std::to_string(k);
      const Disc d = disc_at(ds[k], ptr);
      for (const auto& bf : s.bad_fibers())
        if (d.contains(bf.t)) {
          std::ostringstream os;
          os << "disc contains the bad fiber t = " << bf.t.real() << (bf.t.imag() < 0 ? "" : "+") << bf.t.imag()
             << "i";
          throw ConfigError(ptr, os.str());
        }
      job.discs.push_back(d);
    }
  }
  return job;
}

QuadratureOptions quadrature_options(const json& cfg, Precision prec) {
  const json& q = block(cfg, "quadrature");
  QuadratureOptions o;
  o.tol = get_num(q, "tol", "/quadrature", o.tol);
  o.max_levels = get_int(q, "max_levels", "/quadrature", o.max_levels);
  o.base_n = get_int(q, "base_n", "/quadrature", o.base_n);
  o.bundle_degree = get_int(q, "bundle_degree", "/quadrature", o.bundle_degree);
  if (!(o.tol > 0)) throw ConfigError("/quadrature/tol", "expected a positive number");
  o.precision = prec;
  return o;
}

TateOptions tate_options(const json& cfg, int default_n) {
  const json& t = block(cfg, "tate");
  TateOptions o;
  o.n_iters = get_int(t, "n_iters", "/tate", default_n);
  o.degree_cap = get_int(t, "degree_cap", "/tate", static_cast<int>(o.degree_cap));
  if (o.n_iters < 0) throw ConfigError("/tate/n_iters", "expected a nonnegative integer");
  return o;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
}

json report_json(const HeightReport& r) {
  return {{"value", r.value}, {"error", r.error}, {"levels", r.levels}, {"values", r.values}};
}

struct Flags {
  std::string config;
  std::string precision = "double";
  bool no_cache = false;
  std::string cache_path;
  std::string csv, svg;
  std::string format = "json";
  // example23
  int n_max = 6;
  double r = 0.5;
  std::string schedule = "paper";
  double tol = 1e-8;
  // verify
  std::string entry, corpus;
};

Precision precision_of(const Flags& f) { return f.precision == "extended" ? Precision::Extended : Precision::Double; }

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw ConfigError("", "cannot write " + path);
  body(out);
}

json cmd_height(const json& cfg) {
  const SurfaceJob job = load_surface_job(cfg, true, false);
  const TateOptions topt = tate_options(cfg, 6);
  json res = json::object();
  json list = json::array();
  for (std::size_t i = 0; i < job.sections.size(); ++i) {
    const Section& p = job.sections[i];
    const TateReport t = tate_height(*job.surface, p, topt);
    list.push_back({{"section", i},
                    {"naive", naive_height(*job.surface, p)},
                    {"tate", t.value},
                    {"err", t.error},
                    {"estimates", t.estimates},
                    {"torsion", t.torsion_at.has_value()}});
  }
  if (list.size() == 1)
    for (const char* k : {"naive", "tate", "err"}) res[k] = list[0][k];
  res["results"] = list;
  return res;
}

json cmd_partial(const json& cfg, const Flags& f) {
  const QuadratureOptions opts = quadrature_options(cfg, precision_of(f));
  json list = json::array();
  if (cfg.contains("map")) {
    ProductMap m;
    try {
      m = ProductMap::from_json(cfg.at("map"));
    } catch (const Error& e) {
      std::string msg = e.what();
      const std::string prefix = "Validation: ";
      if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
      std::string ptr;
      if (!msg.empty() && msg[0] == '/') {
        const auto colon = msg.find(": ");
        ptr = msg.substr(0, colon);
        msg = colon == std::string::npos ? "" : msg.substr(colon + 2);
      }
      throw ConfigError("/map" + ptr, msg);
    }
    const json& ds = need(cfg, "discs", "");
    if (!ds.is_array() || ds.empty()) throw ConfigError("/discs", "expected a nonempty array");
    for (std::size_t k = 0; k < ds.size(); ++k) {
      const Disc d = disc_at(ds[k], "/discs/" + std::to_string(k));
      json e = report_json(generic_partial_height(m, d, opts));
      e["disc"] = k;
      list.push_back(e);
    }
    return {{"results", list}};
  }
  const SurfaceJob job = load_surface_job(cfg, true, true);
  FieldCache cache(*job.surface);
  int final_n = 0;
  for (std::size_t i = 0; i < job.sections.size(); ++i)
    for (std::size_t k = 0; k < job.discs.size(); ++k) {
      const HeightReport r = partial_height(*job.surface, job.sections[i], job.discs[k], opts, &cache);
      if (i == 0 && k == 0) final_n = r.levels.back();
      json e = report_json(r);
      e["section"] = i;
      e["disc"] = k;
      list.push_back(e);
    }
  if (!f.csv.empty() || !f.svg.empty()) {
    const LatticeField& field = cache.field(job.discs[0], final_n, opts.precision);
    const DensityGrid g =
        betti_density(field, betti_path(*job.surface, job.sections[0], field), opts.bundle_degree);
    if (!f.csv.empty()) write_file(f.csv, [&](std::ostream& o) { write_density_csv(o, g); });
    if (!f.svg.empty()) write_file(f.svg, [&](std::ostream& o) { write_density_svg(o, g); });
  }
  json res = {{"results", list}};
  if (list.size() == 1) res["value"] = list[0]["value"], res["error"] = list[0]["error"];
  return res;
}

json cmd_full(const json& cfg) {
  const SurfaceJob job = load_surface_job(cfg, true, false);
  const json& fb = block(cfg, "full");
  FullHeightOptions fo;
  fo.grid_n = get_int(fb, "grid_n", "/full", fo.grid_n);
  fo.excision_radius = get_num(fb, "excision_radius", "/full", fo.excision_radius);
  fo.levels = get_int(fb, "levels", "/full", fo.levels);
  fo.angular = get_int(fb, "angular", "/full", fo.angular);
  const TateOptions topt = tate_options(cfg, 6);
  json list = json::array();
  for (std::size_t i = 0; i < job.sections.size(); ++i) {
    const Section& p = job.sections[i];
    const TateReport t = tate_height(*job.surface, p, topt);
    json e = {{"section", i}, {"tate", t.value}, {"tate_error", t.error}};
    if (p.is_zero() || t.torsion_at) {
      e["full"] = 0.0;
      e["full_error"] = 0.0;
      e["identity_ok"] = t.value == 0.0;
    } else {
      const FullHeightReport fr = full_height(*job.surface, p, fo);
      e["full"] = fr.value;
      e["full_error"] = fr.error;
      e["bulk"] = fr.bulk;
      e["bulk_error"] = fr.bulk_error;
      e["chart_radius"] = fr.chart_radius;
      json patches = json::array();
      for (const auto& pt : fr.patches)
        patches.push_back({{"center", complex_json(pt.center)},
                           {"at_infinity_chart", pt.at_infinity_chart},
                           {"radius", pt.radius},
                           {"bad", pt.bad},
                           {"extrapolated", pt.extrapolated},
                           {"error", pt.error}});
      e["patches"] = patches;
      const double diff = std::abs(fr.value - t.value);
      e["identity_ok"] = diff <= std::max(1e-2 * t.value, fr.error + t.error);
    }
    list.push_back(e);
  }
  return {{"results", list}};
}

json cmd_gram(const json& cfg, const Flags& f) {
  const SurfaceJob job = load_surface_job(cfg, true, true);
  const int n = get_int(block(cfg, "gram"), "grid_n", "/gram", 0);
  const GramResult g = gram(*job.surface, job.sections, job.discs[0], n, quadrature_options(cfg, precision_of(f)));
  json m = json::array();
  for (int i = 0; i < g.matrix.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < g.matrix.cols(); ++j) row.push_back(g.matrix(i, j));
    m.push_back(row);
  }
  std::vector<double> ev(g.eigenvalues.data(), g.eigenvalues.data() + g.eigenvalues.size());
  return {{"matrix", m}, {"eigenvalues", ev}, {"min_eigenvalue", g.min_eigenvalue}, {"grid_n", g.grid_n}};
}

json cmd_nondeg(const json& cfg, const Flags& f) {
  const SurfaceJob job = load_surface_job(cfg, true, true);
  const int m_max = get_int(block(cfg, "nondeg"), "m_max", "/nondeg", 3);
  const auto rows = nondeg_ratio(*job.surface, job.sections[0], job.discs[0], m_max,
                                 quadrature_options(cfg, precision_of(f)), tate_options(cfg, 4));
  json list = json::array();
  for (const auto& r : rows)
    list.push_back({{"m", r.m},
                    {"partial", r.partial},
                    {"partial_error", r.partial_error},
                    {"tate", r.tate},
                    {"ratio", r.ratio}});
  return {{"rows", list}};
}

void sweep_csv(std::ostream& o, const std::vector<SweepRow>& rows) {
  o << "n,a_n,closed_form,quadrature,quadrature_error,abs_err\n" << std::setprecision(17);
  for (const auto& r : rows)
    o << r.n << ',' << r.a_n << ',' << r.closed_form << ',' << r.quadrature << ',' << r.quadrature_error << ','
      << r.abs_err << '\n';
}

json cmd_example23(const Flags& f, std::vector<SweepRow>& rows) {
  if (f.schedule != "paper" && f.schedule != "unit") throw ConfigError("/schedule", "expected paper or unit");
  QuadratureOptions o;
  o.tol = f.tol;
  rows = counterexample_sweep(f.n_max, f.r, f.schedule == "paper" ? Schedule::Decay : Schedule::Unit, o);
  json list = json::array();
  for (const auto& r : rows)
    list.push_back({{"n", r.n},
                    {"a_n", r.a_n},
                    {"closed_form", r.closed_form},
                    {"quadrature", r.quadrature},
                    {"quadrature_error", r.quadrature_error},
                    {"abs_err", r.abs_err}});
  return {{"rows", list}, {"r", f.r}, {"schedule", f.schedule}};
}

json cmd_brody(const json& cfg) {
  const json& b = need(cfg, "brody", "");
  const json& fam = need(b, "family", "/brody");
  if (!fam.is_array() || fam.empty()) throw ConfigError("/brody/family", "expected a nonempty array of expressions");
  std::vector<std::string> texts;
  for (std::size_t k = 0; k < fam.size(); ++k) {
    if (!fam[k].is_string()) throw ConfigError("/brody/family/" + std::to_string(k), "expected a string");
    texts.push_back(fam[k].get<std::string>());
  }
  const Disc d = disc_at(need(b, "disc", "/brody"), "/brody/disc");
  const json& nr = need(b, "n_range", "/brody");
  if (!nr.is_array() || nr.empty()) throw ConfigError("/brody/n_range", "expected a nonempty array");
  std::vector<int> ns;
  for (std::size_t k = 0; k < nr.size(); ++k) {
    if (!nr[k].is_number_integer()) throw ConfigError("/brody/n_range/" + std::to_string(k), "expected an integer");
    ns.push_back(nr[k].get<int>());
  }
  // Parse every member once up front so that syntax errors carry a pointer.
  auto family = [&](int n) {
    std::vector<HolExpr> comps;
    for (std::size_t k = 0; k < texts.size(); ++k) {
      try {
        comps.push_back(parse_holexpr(texts[k], {{"n", n}}));
      } catch (const Error& e) {
        throw ConfigError("/brody/family/" + std::to_string(k), e.what());
      }
    }
    return ProductMap(std::move(comps));
  };
  for (int n : ns) family(n);
  ZoomOptions zo;
  zo.growth_threshold = get_num(b, "growth_threshold", "/brody", zo.growth_threshold);
  const double target = get_num(b, "target_c", "/brody", 1.0);
  const double probe_radius = get_num(b, "probe_radius", "/brody", 1.0);
  const int probe_grid = get_int(b, "probe_grid", "/brody", 21);
  const double tol = get_num(b, "tol", "/brody", 1e-2);

  ZoomSequence zs;
  try {
    zs = zoom_sequence(family, d, ns, zo);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NormBounded) throw;
    return {{"norm_bounded", true}, {"message", e.what()}};
  }
  json steps = json::array();
  std::vector<DiscMap> psis;
  for (const auto& st : zs.steps) {
    const Reparametrization rp = brody_reparametrize(st.map, target);
    psis.push_back(rp.psi);
    steps.push_back({{"n", st.n},
                     {"center", complex_json(st.center)},
                     {"norm", st.norm},
                     {"scale", st.scale},
                     {"mu_max", rp.mu_max},
                     {"z0", complex_json(rp.z0)},
                     {"psi_radius", rp.psi.radius},
                     {"dpsi0", rp.psi.derivative_norm(0.0)},
                     {"interior_bound", interior_bound(rp.psi, std::min(probe_radius, rp.psi.radius), 41)}});
  }
  json probe;
  try {
    const ProbeReport rep = limit_probe(psis, probe_radius, probe_grid, tol);
    probe = {{"cauchy", rep.cauchy}, {"verticality", rep.verticality}, {"distances", rep.distances}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ProbeRadiusTooLarge) throw;
    probe = {{"error", e.what()}};
  }
  return {{"norm_bounded", false}, {"zoom_valid", zs.valid()}, {"steps", steps}, {"probe", probe}};
}

json check(const std::string& name, bool pass, json detail = json::object()) {
  return {{"name", name}, {"pass", pass}, {"detail", std::move(detail)}};
}

json cmd_verify(const json& cfg, const std::string& hash, const Flags& f) {
  const SurfaceJob job = load_surface_job(cfg, true, true);
  const EllipticSurface& s = *job.surface;
  const QuadratureOptions qopt = quadrature_options(cfg, precision_of(f));
  const TateOptions topt = tate_options(cfg, 4);
  std::mt19937_64 rng(std::stoull(hash, nullptr, 16));
  json checks = json::array();

  // Exact group law on random combinations of the configured sections.
  {
    std::uniform_int_distribution<int> coef(-4, 4);
    std::uniform_int_distribution<std::size_t> pick(0, job.sections.size() - 1);
    int trials = 0, failures = 0;
    for (int k = 0; k < 40; ++k) {
      const Section& p = job.sections[pick(rng)];
      const Section& q = job.sections[pick(rng)];
      const long a = coef(rng), c = coef(rng);
      ++trials;
      try {
        const Section lhs = section_add(s, section_mul(s, a, p), section_mul(s, c, p));
        const bool ok = lhs == section_mul(s, a + c, p) &&
                        section_add(s, section_add(s, p, q), section_neg(q)) == p &&
                        section_add(s, p, section_neg(p)).is_zero() && s.contains(section_add(s, p, q));
        if (!ok) ++failures;
      } catch (const Error&) {
        ++failures;
      }
    }
    checks.push_back(check("group_law", failures == 0, {{"trials", trials}, {"failures", failures}}));
  }

  for (std::size_t i = 0; i < job.sections.size(); ++i) {
    const Section& p = job.sections[i];
    const std::string tag = "/sections/" + std::to_string(i);
    const TateReport t1 = tate_height(s, p, topt);
    if (p.is_zero() || t1.torsion_at) {
      checks.push_back(check("torsion_height_zero" + tag, t1.value == 0.0, {{"tate", t1.value}}));
      continue;
    }
    const Section p2 = section_mul(s, 2, p);
    const TateReport t2 = tate_height(s, p2, topt);
    const double dq = std::abs(t2.value - 4 * t1.value);
    checks.push_back(check("tate_quadratic" + tag, dq <= 4 * t1.error + t2.error + 1e-12,
                           {{"tate", t1.value}, {"tate_2P", t2.value}}));

    for (std::size_t k = 0; k < job.discs.size(); ++k) {
      const std::string dtag = tag + "/discs/" + std::to_string(k);
      FieldCache cache(s);
      const Disc& D = job.discs[k];
      if (!section_poles_in(p, D, 1e-9).empty() || !section_poles_in(p2, D, 1e-9).empty()) continue;
      const LatticeField& field = cache.field(D, 32, qopt.precision);
      const BettiPath b1 = betti_path(s, p, field), b2 = betti_path(s, p2, field);
      double worst = 0;
      for (std::size_t node = 0; node < b1.beta.size(); ++node) {
        if (!field.grid.active[node]) continue;
        for (int c = 0; c < 2; ++c) {
          const double d = b2.beta[node][c] - 2 * b1.beta[node][c];
          worst = std::max(worst, std::abs(d - std::round(d)));
        }
      }
      checks.push_back(check("betti_doubling" + dtag, worst <= 1e-7, {{"max_offset", worst}}));
      const DensityGrid g = betti_density(field, b1, qopt.bundle_degree);
      checks.push_back(check("density_semipositive" + dtag, g.min_value() >= -1e-9 * g.max_value(),
                             {{"min", g.min_value()}, {"max", g.max_value()}}));
      const HeightReport h1 = partial_height(s, p, D, qopt, &cache);
      const HeightReport h2 = partial_height(s, p2, D, qopt, &cache);
      checks.push_back(check("partial_quadratic" + dtag,
                             std::abs(h2.value - 4 * h1.value) <= 16 * (h2.error + 4 * h1.error) + 1e-12,
                             {{"partial", h1.value}, {"partial_2P", h2.value}}));
    }
  }
  bool all = true;
  for (const auto& c : checks) all = all && c["pass"].get<bool>();
  return {{"checks", checks}, {"passed", all}};
}

std::string timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int exit_code_for(ErrorKind kind) {
  if (kind == ErrorKind::Validation) return 2;
  return is_numerical(kind) ? 3 : 2;
}

int emit_error(std::ostream& out, const std::string& kind, const std::string& message, const std::string& pointer,
               int code) {
  json e = {{"kind", kind}, {"message", message}};
  if (!pointer.empty() || kind == "Validation") e["pointer"] = pointer;
  out << json{{"error", e}, {"exit_code", code}}.dump(2) << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heights and Betti forms for elliptic surfaces over C(t)", "betti-heights"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  if (const char* c = std::getenv("BETTI_HEIGHTS_CACHE")) f.cache_path = c;
  if (f.cache_path.empty()) f.cache_path = "betti_heights_cache.jsonl";
  if (const char* c = std::getenv("BETTI_HEIGHTS_CORPUS")) f.corpus = c;
  if (f.corpus.empty()) f.corpus = "corpus";
  app.add_option("--precision", f.precision, "Floating-point precision")->check(CLI::IsMember({"double", "extended"}));
  app.add_flag("--no-cache", f.no_cache, "Bypass the result cache");
  app.add_option("--cache", f.cache_path, "JSON-lines result cache");
  app.set_version_flag("--version", std::string(version()));

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "Job config (JSON)")->required();
    sub->add_option("--csv", f.csv, "CSV artifact path");
    sub->add_option("--svg", f.svg, "SVG artifact path");
  };
  with_config(app.add_subcommand("height", "Naive and canonical heights"));
  with_config(app.add_subcommand("partial", "Betti partial heights on discs"));
  with_config(app.add_subcommand("full", "Full height integral against the canonical height"));
  with_config(app.add_subcommand("gram", "Partial height pairing matrix"));
  with_config(app.add_subcommand("nondeg", "Partial to canonical height ratios"));
  with_config(app.add_subcommand("brody", "Zoom, reparametrise and probe a map family"));
  CLI::App* ex = app.add_subcommand("example23", "Partial heights of z -> (z, a_n z^n)");
  ex->add_option("--n-max", f.n_max)->check(CLI::Range(1, 64));
  ex->add_option("--r", f.r)->check(CLI::Range(0.0, 1.0));
  ex->add_option("--schedule", f.schedule)->check(CLI::IsMember({"paper", "unit"}));
  ex->add_option("--tol", f.tol);
  ex->add_option("--csv", f.csv, "CSV table path");
  ex->add_option("--format", f.format, "stdout format")->check(CLI::IsMember({"json", "csv"}));
  CLI::App* ver = app.add_subcommand("verify", "Invariant suite on a corpus entry");
  auto* entry_opt = ver->add_option("--entry", f.entry, "Corpus entry name");
  ver->add_option("--config", f.config, "Job config (JSON)")->excludes(entry_opt);
  ver->add_option("--corpus", f.corpus, "Corpus directory");

  std::vector<const char*> argv;
  argv.push_back("betti-heights");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    return emit_error(out, "Usage", e.what(), "", 2);
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    json cfg = json::object();
    json flags = {{"precision", f.precision}};
    if (cmd == "verify") {
      if (f.config.empty() && f.entry.empty()) throw ConfigError("", "verify needs --entry or --config");
      const std::string path = f.config.empty() ? f.corpus + "/" + f.entry + ".json" : f.config;
      cfg = load_config_file(path);
    } else if (cmd == "example23") {
      flags.update({{"n_max", f.n_max}, {"r", f.r}, {"schedule", f.schedule}, {"tol", f.tol}});
    } else {
      cfg = load_config_file(f.config);
    }
    if (!cfg.is_object()) throw ConfigError("", "config must be a JSON object");
    const std::string hash = job_hash({{"command", cmd}, {"config", cfg}, {"flags", flags}});

    ResultStore store(f.cache_path);
    const bool cacheable = cmd != "verify" && f.csv.empty() && f.svg.empty() && !f.no_cache;
    std::vector<SweepRow> rows;
    json result;
    bool hit = false;
    if (cacheable) {
      if (auto rec = store.lookup(hash)) result = rec->result, hit = true;
      if (store.skipped_lines() > 0)
        err << "warning: skipped " << store.skipped_lines() << " corrupt cache line(s) in " << store.path() << "\n";
    }
    if (!hit) {
      if (cmd == "height") result = cmd_height(cfg);
      else if (cmd == "partial") result = cmd_partial(cfg, f);
      else if (cmd == "full") result = cmd_full(cfg);
      else if (cmd == "gram") result = cmd_gram(cfg, f);
      else if (cmd == "nondeg") result = cmd_nondeg(cfg, f);
      else if (cmd == "example23") result = cmd_example23(f, rows);
      else if (cmd == "brody") result = cmd_brody(cfg);
      else result = cmd_verify(cfg, hash, f);
      result["command"] = cmd;
      result["job_hash"] = hash;
      result["version"] = version();
      if (cacheable) store.append({hash, cmd, version(), timestamp_now(), result});
    }

    if (cmd == "example23") {
      if (rows.empty() && hit)
        for (const auto& r : result["rows"])
          rows.push_back({r["n"].get<int>(), r["a_n"].get<double>(), r["closed_form"].get<double>(),
                          r["quadrature"].get<double>(), r["quadrature_error"].get<double>(),
                          r["abs_err"].get<double>()});
      if (!f.csv.empty()) write_file(f.csv, [&](std::ostream& o) { sweep_csv(o, rows); });
      if (f.format == "csv") {
        sweep_csv(out, rows);
        return 0;
      }
    }
    result["cached"] = hit;
    out << result.dump(2) << "\n";
    if (cmd == "verify" && !result["passed"].get<bool>()) return 3;
    return 0;
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    const auto colon = msg.find(": ", std::string("Validation: ").size());
    return emit_error(out, "Validation", colon == std::string::npos ? msg : msg.substr(colon + 2), e.pointer(), 2);
  } catch (const Error& e) {
    return emit_error(out, to_string(e.kind()), e.what(), "", exit_code_for(e.kind()));
  } catch (const json::exception& e) {
    return emit_error(out, "Validation", e.what(), "", 2);
  } catch (const std::exception& e) {
    return emit_error(out, "Internal", e.what(), "", 3);
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace bh::cli
