// Python bindings.  Configs and reports cross the boundary as JSON text; the
// tihom package wraps them into dicts.

#include "tihom/elasticity.hpp"
#include "tihom/errors.hpp"
#include "tihom/experiment.hpp"
#include "tihom/field_io.hpp"
#include "tihom/pfft.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace tihom;

namespace {

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  return ExperimentConfig::from_json(nlohmann::json::parse(text), base_dir);
}

Eigen::VectorXcd transform(const std::string& matrix, const Eigen::VectorXcd& a, bool inverse) {
  const auto M = PatternMatrix::parse(matrix);
  if (a.size() != M.size()) throw ShapeError("expected " + std::to_string(M.size()) + " samples");
  const std::span<const cplx> in(a.data(), static_cast<std::size_t>(a.size()));
  const auto out = inverse ? ifft(M, in) : fft(M, in);
  return Eigen::Map<const Eigen::VectorXcd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

}  // namespace

PYBIND11_MODULE(_tihom, m) {
  m.doc() = "Spectral periodic homogenization on integer pattern lattices";
  m.attr("__version__") = TIHOM_VERSION;

  py::register_exception<Error>(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const nlohmann::json::exception& e) {
      py::set_error(PyExc_ValueError, e.what());
    }
  });

  m.def("pattern_info", [](const std::string& matrix) { return pattern_info(PatternMatrix::parse(matrix)).dump(); },
        py::arg("matrix"));

  m.def(
      "solve",
      [](const std::string& config, const std::string& base_dir, bool write) {
        const auto cfg = parse_config(config, base_dir);
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          const auto ref = resolve_reference(cfg);
          res = run_solve(cfg, ref ? &*ref : nullptr, write);
        }
        return py::make_tuple(res.report.dump(), Eigen::MatrixXcd(res.total));
      },
      py::arg("config"), py::arg("base_dir") = "", py::arg("write") = false,
      "Runs one solve; returns (report JSON, total strain m x D).");

  m.def(
      "sweep_alpha",
      [](const std::string& config, const std::string& base_dir, bool write) {
        const auto cfg = parse_config(config, base_dir);
        py::gil_scoped_release release;
        return sweep_alpha(cfg, write).report.dump();
      },
      py::arg("config"), py::arg("base_dir") = "", py::arg("write") = false);

  m.def(
      "fft", [](const std::string& matrix, const Eigen::VectorXcd& a) { return transform(matrix, a, false); },
      py::arg("matrix"), py::arg("a"));
  m.def(
      "ifft", [](const std::string& matrix, const Eigen::VectorXcd& a) { return transform(matrix, a, true); },
      py::arg("matrix"), py::arg("a"));

  m.def(
      "iso_stiffness", [](double lambda, double mu, int d) { return Eigen::MatrixXd(iso_stiffness(lambda, mu, d)); },
      py::arg("lam"), py::arg("mu"), py::arg("d"));
  m.def(
      "green_coeff",
      [](const Eigen::MatrixXd& C0, const Eigen::VectorXd& k) {
        return Eigen::MatrixXd(green_coeff(Tensor4(C0), RVec(k)));
      },
      py::arg("C0"), py::arg("k"));

  m.def(
      "read_field",
      [](const std::string& path) {
        const auto f = read_field(path);
        return py::make_tuple(f.lattice.to_string(), Eigen::MatrixXd(f.as_strain().real()));
      },
      py::arg("path"), "Reads a PFLD file; returns (pattern matrix, m x D values).");
}
