#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "betti_heights/brody.hpp"
#include "betti_heights/cli.hpp"
#include "betti_heights/error.hpp"
#include "betti_heights/forms.hpp"
#include "betti_heights/heights.hpp"

namespace py = pybind11;
using namespace bh;

namespace {

py::dict report_dict(const HeightReport& r) {
  py::dict d;
  d["value"] = r.value;
  d["error"] = r.error;
  d["levels"] = r.levels;
  d["values"] = r.values;
  return d;
}

ProductMap product_map(const std::vector<std::string>& components, const std::vector<double>& weights) {
  std::vector<HolExpr> comps;
  for (const auto& c : components) comps.push_back(parse_holexpr(c));
  return ProductMap(std::move(comps), weights);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Heights, Betti forms and Brody reparametrisation for elliptic surfaces over C(t)";

  // Messages start with the error kind, e.g. "PoleAtPoint: ...".
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::class_<Section>(m, "Section")
      .def(py::init([](const std::string& x, const std::string& y) {
             return Section::affine(parse_ratfun(x), parse_ratfun(y));
           }),
           py::arg("x"), py::arg("y"))
      .def_static("zero", &Section::zero)
      .def_property_readonly("is_zero", &Section::is_zero)
      .def_property_readonly("x", [](const Section& p) { return p.x().to_string(); })
      .def_property_readonly("y", [](const Section& p) { return p.y().to_string(); })
      .def("__eq__", [](const Section& a, const Section& b) { return a == b; })
      .def("__repr__", &Section::to_string);

  py::class_<EllipticSurface>(m, "Surface")
      .def(py::init([](const std::string& a, const std::string& b) {
             return EllipticSurface(parse_ratfun(a), parse_ratfun(b));
           }),
           py::arg("a"), py::arg("b"))
      .def_property_readonly("a", [](const EllipticSurface& s) { return s.a().to_string(); })
      .def_property_readonly("b", [](const EllipticSurface& s) { return s.b().to_string(); })
      .def_property_readonly("discriminant", [](const EllipticSurface& s) { return s.discriminant().to_string(); })
      .def_property_readonly("bad_fibers",
                             [](const EllipticSurface& s) {
                               std::vector<cplx> out;
                               for (const auto& b : s.bad_fibers()) out.push_back(b.t);
                               return out;
                             })
      .def("contains", &EllipticSurface::contains)
      .def("add", &section_add)
      .def("mul", [](const EllipticSurface& s, long k, const Section& p) { return section_mul(s, k, p); })
      .def("neg", [](const EllipticSurface&, const Section& p) { return section_neg(p); })
      .def("naive_height", &naive_height);

  m.def(
      "tate_height",
      [](const EllipticSurface& s, const Section& p, int n_iters) {
        const TateReport r = tate_height(s, p, {n_iters, 20000});
        py::dict d;
        d["value"] = r.value;
        d["error"] = r.error;
        d["estimates"] = r.estimates;
        d["naive"] = r.naive;
        d["torsion"] = r.torsion_at.has_value();
        return d;
      },
      py::arg("surface"), py::arg("section"), py::arg("n_iters") = 6);

  m.def(
      "fiber_periods",
      [](const EllipticSurface& s, cplx t) {
        const FiberLattice l = fiber_periods(s, t);
        return std::make_pair(l.w1, l.w2);
      },
      py::arg("surface"), py::arg("t"));

  m.def(
      "betti_density_at",
      [](const EllipticSurface& s, const Section& p, cplx t) { return betti_density_at(s, p, t); },
      py::arg("surface"), py::arg("section"), py::arg("t"));

  m.def(
      "partial_height",
      [](const EllipticSurface& s, const Section& p, cplx center, double radius, double tol, int max_levels) {
        QuadratureOptions o;
        o.tol = tol;
        o.max_levels = max_levels;
        return report_dict(partial_height(s, p, {center, radius}, o));
      },
      py::arg("surface"), py::arg("section"), py::arg("center"), py::arg("radius"), py::arg("tol") = 1e-6,
      py::arg("max_levels") = 5);

  m.def(
      "full_height",
      [](const EllipticSurface& s, const Section& p, int grid_n) {
        FullHeightOptions o;
        o.grid_n = grid_n;
        const FullHeightReport r = full_height(s, p, o);
        py::dict d = report_dict(r);
        d["bulk"] = r.bulk;
        d["bulk_error"] = r.bulk_error;
        return d;
      },
      py::arg("surface"), py::arg("section"), py::arg("grid_n") = 256);

  m.def(
      "gram",
      [](const EllipticSurface& s, const std::vector<Section>& secs, cplx center, double radius) {
        const GramResult g = gram(s, secs, {center, radius});
        std::vector<std::vector<double>> rows(g.matrix.rows(), std::vector<double>(g.matrix.cols()));
        for (int i = 0; i < g.matrix.rows(); ++i)
          for (int j = 0; j < g.matrix.cols(); ++j) rows[i][j] = g.matrix(i, j);
        py::dict d;
        d["matrix"] = rows;
        d["min_eigenvalue"] = g.min_eigenvalue;
        d["grid_n"] = g.grid_n;
        return d;
      },
      py::arg("surface"), py::arg("sections"), py::arg("center"), py::arg("radius"));

  m.def(
      "nondeg_ratio",
      [](const EllipticSurface& s, const Section& p, cplx center, double radius, int m_max) {
        std::vector<double> out;
        for (const auto& r : nondeg_ratio(s, p, {center, radius}, m_max)) out.push_back(r.ratio);
        return out;
      },
      py::arg("surface"), py::arg("section"), py::arg("center"), py::arg("radius"), py::arg("m_max") = 3);

  m.def(
      "fs_density",
      [](const std::vector<std::string>& comps, cplx z, const std::vector<double>& w) {
        return fs_density(product_map(comps, w), z);
      },
      py::arg("components"), py::arg("z"), py::arg("weights") = std::vector<double>{});

  m.def(
      "generic_partial_height",
      [](const std::vector<std::string>& comps, cplx center, double radius, double tol) {
        QuadratureOptions o;
        o.tol = tol;
        return report_dict(generic_partial_height(product_map(comps, {}), {center, radius}, o));
      },
      py::arg("components"), py::arg("center"), py::arg("radius"), py::arg("tol") = 1e-8);

  m.def("example_closed_form", &example_closed_form, py::arg("n"), py::arg("a"), py::arg("r"));

  m.def(
      "counterexample_sweep",
      [](int n_max, double r, const std::string& schedule) {
        QuadratureOptions o;
        o.tol = 1e-10;
        py::list rows;
        for (const auto& row :
             counterexample_sweep(n_max, r, schedule == "unit" ? Schedule::Unit : Schedule::Decay, o)) {
          py::dict d;
          d["n"] = row.n;
          d["a_n"] = row.a_n;
          d["closed_form"] = row.closed_form;
          d["quadrature"] = row.quadrature;
          d["abs_err"] = row.abs_err;
          rows.append(d);
        }
        return rows;
      },
      py::arg("n_max"), py::arg("r"), py::arg("schedule") = "paper");

  m.def(
      "brody",
      [](const std::vector<std::string>& family, cplx center, double radius, const std::vector<int>& n_range,
         double target_c, double probe_radius) {
        auto fam = [&](int n) {
          std::vector<HolExpr> comps;
          for (const auto& c : family) comps.push_back(parse_holexpr(c, {{"n", n}}));
          return ProductMap(std::move(comps));
        };
        const ZoomSequence zs = zoom_sequence(fam, {center, radius}, n_range);
        py::list steps;
        std::vector<DiscMap> psis;
        for (const auto& st : zs.steps) {
          const Reparametrization rp = brody_reparametrize(st.map, target_c);
          psis.push_back(rp.psi);
          py::dict d;
          d["n"] = st.n;
          d["center"] = st.center;
          d["norm"] = st.norm;
          d["scale"] = st.scale;
          d["psi_radius"] = rp.psi.radius;
          d["dpsi0"] = rp.psi.derivative_norm(0.0);
          steps.append(d);
        }
        const ProbeReport rep = limit_probe(psis, probe_radius, 21, 1e-2);
        py::dict out;
        out["valid"] = zs.valid();
        out["steps"] = steps;
        out["verticality"] = rep.verticality;
        out["cauchy"] = rep.cauchy;
        return out;
      },
      py::arg("family"), py::arg("center"), py::arg("radius"), py::arg("n_range"), py::arg("target_c") = 1.0,
      py::arg("probe_radius") = 1.0);

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));

  m.attr("__version__") = cli::version();
}
