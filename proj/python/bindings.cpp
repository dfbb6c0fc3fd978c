#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "birkhoff/baselines.hpp"
#include "birkhoff/io.hpp"
#include "birkhoff/mixer.hpp"
#include "birkhoff/rtbp.hpp"
#include "birkhoff/spectral.hpp"
#include "birkhoff/transport.hpp"

namespace py = pybind11;
using namespace birkhoff;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d array");
  const auto r = static_cast<std::size_t>(a.shape(0)), c = static_cast<std::size_t>(a.shape(1));
  return Matrix(r, c, std::vector<double>(a.data(), a.data() + r * c));
}

Vector to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-d array");
  return Vector(a.data(), a.data() + a.size());
}

Array from_matrix(const Matrix& m) {
  return Array(std::vector<py::ssize_t>{static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())},
               m.storage().data());
}

Array from_vector(const Vector& v) {
  return Array(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())}, v.data());
}

SquashSpec make_squash(const std::string& kind, double beta, double epsilon, double rho) {
  SquashSpec s{squash_kind_from_string(kind), beta, epsilon, rho};
  s.validate();
  return s;
}

Margins make_margins(std::size_t n, std::size_t m, const std::optional<Array>& rows,
                     const std::optional<Array>& cols) {
  return Margins(rows ? to_vector(*rows) : Vector(n, 1.0), cols ? to_vector(*cols) : Vector(m, 1.0));
}

py::dict residual_dict(const SinkhornResidual& r) {
  py::dict d;
  d["row_residual"] = r.row_residual;
  d["col_residual"] = r.col_residual;
  d["iterations"] = r.iterations;
  return d;
}

io::Json parse_spec(const std::string& text) { return io::Json::parse(text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact charts of transportation and Birkhoff polytopes.";
  py::register_exception<Error>(m, "BirkhoffError", PyExc_ValueError);

  m.def("count_params", &count_params, py::arg("n"), py::arg("m"));
  m.def("chart_dimension", &chart_dimension, py::arg("n"), py::arg("m"));

  m.def(
      "tbp_forward",
      [](const Array& params, std::size_t n, std::size_t mm, std::optional<Array> rows, std::optional<Array> cols,
         const std::string& squash, double beta, double epsilon, double rho) {
        const auto h = tbp_forward(make_margins(n, mm, rows, cols), ChartParams(to_vector(params)),
                                   make_squash(squash, beta, epsilon, rho));
        return from_matrix(h.entries());
      },
      py::arg("params"), py::arg("n"), py::arg("m"), py::arg("row_sums") = py::none(),
      py::arg("col_sums") = py::none(), py::arg("squash") = "sigmoid", py::arg("beta") = 4.0,
      py::arg("epsilon") = 1e-6, py::arg("rho") = 1e-4);

  m.def(
      "tbp_inverse",
      [](const Array& matrix, std::optional<Array> rows, std::optional<Array> cols, const std::string& squash,
         double beta, double epsilon, double rho) {
        Matrix e = to_matrix(matrix);
        Margins margins(rows ? to_vector(*rows) : row_sums(e), cols ? to_vector(*cols) : col_sums(e));
        const TransportMatrix h(std::move(e), std::move(margins));
        return from_vector(tbp_inverse(h, make_squash(squash, beta, epsilon, rho)).values);
      },
      py::arg("matrix"), py::arg("row_sums") = py::none(), py::arg("col_sums") = py::none(),
      py::arg("squash") = "sigmoid", py::arg("beta") = 4.0, py::arg("epsilon") = 1e-6, py::arg("rho") = 1e-4);

  m.def(
      "rtbp_forward",
      [](const Array& params, std::size_t n, std::size_t mm, std::optional<Array> rows, std::optional<Array> cols,
         const std::string& squash, double beta, double epsilon, double rho) {
        const auto h = rtbp_forward(make_margins(n, mm, rows, cols), ChartParams(to_vector(params)),
                                    make_squash(squash, beta, epsilon, rho));
        return from_matrix(h.entries());
      },
      py::arg("params"), py::arg("n"), py::arg("m"), py::arg("row_sums") = py::none(),
      py::arg("col_sums") = py::none(), py::arg("squash") = "sigmoid", py::arg("beta") = 4.0,
      py::arg("epsilon") = 1e-6, py::arg("rho") = 1e-4);

  m.def(
      "sinkhorn",
      [](const Array& logits, int iterations) {
        const auto r = sinkhorn(to_matrix(logits), iterations);
        return py::make_tuple(from_matrix(r.matrix), residual_dict(r.residual));
      },
      py::arg("logits"), py::arg("iterations") = kReferenceSinkhornIterations);

  m.def(
      "bvn", [](const Array& logits) { return from_matrix(bvn_combination(to_vector(logits))); },
      py::arg("logits"));

  m.def(
      "kronecker",
      [](std::vector<std::size_t> sizes, const std::vector<Array>& logits) {
        KroneckerFactors f{std::move(sizes), {}};
        for (const auto& l : logits) f.logits.push_back(to_vector(l));
        return from_matrix(kronecker_mix(f));
      },
      py::arg("factor_sizes"), py::arg("logits"));

  m.def(
      "ds_deviation",
      [](const Array& matrix) {
        const auto d = ds_deviation(to_matrix(matrix));
        return py::make_tuple(d.row, d.col);
      },
      py::arg("matrix"));

  m.def(
      "analyze",
      [](const Array& matrix) {
        const auto r = analyze(to_matrix(matrix));
        py::dict d;
        std::vector<std::complex<double>> ev(r.eigenvalues.begin(), r.eigenvalues.end());
        d["eigenvalues"] = py::array(py::cast(ev));
        d["eigenvalue_moduli"] = from_vector(r.eigenvalue_moduli);
        d["spectral_gap"] = r.spectral_gap ? py::object(py::float_(*r.spectral_gap)) : py::object(py::none());
        d["absolute_gap"] = r.absolute_gap;
        d["is_ergodic"] = r.is_ergodic;
        d["is_symmetric"] = r.is_symmetric;
        d["doubly_stochastic"] = r.doubly_stochastic;
        d["ds_deviation"] = r.ds_deviation;
        d["warnings"] = r.warnings;
        return d;
      },
      py::arg("matrix"));

  // spec is the JSON text of a mixer spec, see birkhoff_lab.mixer
  m.def(
      "_build_mixer",
      [](const std::string& spec_json, std::optional<Array> logits) {
        const MixerSpec spec = io::mixer_from_json(parse_spec(spec_json));
        const Vector l = logits ? to_vector(*logits) : default_logits(spec);
        const auto out = build_mixer(spec, l);
        return py::make_tuple(from_matrix(out.matrix),
                              out.residual ? py::object(residual_dict(*out.residual)) : py::object(py::none()));
      },
      py::arg("spec_json"), py::arg("logits") = py::none());

  m.def(
      "_param_count", [](const std::string& spec_json) { return io::mixer_from_json(parse_spec(spec_json)).param_count(); },
      py::arg("spec_json"));
}
