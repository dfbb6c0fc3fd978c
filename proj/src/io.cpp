#include "birkhoff/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace birkhoff::io {

namespace {

template <class T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::InvalidArgument, std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("bad field \"") + key + "\": " + e.what());
  }
}

const Json& member(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::InvalidArgument, std::string("missing field \"") + key + "\"");
  return j.at(key);
}

template <class T>
T field_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return field<T>(j, key);
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(Vector(r.begin(), r.end()));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::InvalidArgument, "matrix must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  Vector data;
  data.reserve(rows * cols);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) fail(ErrorKind::DimensionMismatch, "matrix rows must have equal length");
    for (const auto& v : row) {
      if (!v.is_number()) fail(ErrorKind::InvalidArgument, "matrix entries must be numbers");
      data.push_back(v.get<double>());
    }
  }
  return Matrix(rows, cols, std::move(data));
}

Json to_json(const TransportMatrix& t) {
  return Json{{"n", t.n()},
              {"m", t.m()},
              {"row_sums", t.margins().row_sums()},
              {"col_sums", t.margins().col_sums()},
              {"entries", to_json(t.entries())}};
}

TransportMatrix transport_from_json(const Json& j, double tol) {
  Matrix entries = matrix_from_json(member(j, "entries"));
  const auto n = field_or<std::size_t>(j, "n", entries.rows());
  const auto m = field_or<std::size_t>(j, "m", entries.cols());
  if (n != entries.rows() || m != entries.cols()) fail(ErrorKind::DimensionMismatch, "n, m disagree with entries");
  Vector r = field_or<Vector>(j, "row_sums", Vector(n, 1.0));
  Vector c = field_or<Vector>(j, "col_sums", Vector(m, 1.0));
  return TransportMatrix(std::move(entries), Margins(std::move(r), std::move(c)), tol);
}

Json to_json(const ChartParams& p) { return p.values; }

ChartParams params_from_json(const Json& j) {
  if (!j.is_array()) fail(ErrorKind::InvalidArgument, "chart parameters must be a flat array");
  return ChartParams(j.get<Vector>());
}

Json to_json(const SinkhornResidual& r) {
  return Json{{"row_residual", r.row_residual}, {"col_residual", r.col_residual}, {"iterations", r.iterations}};
}

Json to_json(const SpectralReport& r) {
  Json values = Json::array();
  for (const auto& z : r.eigenvalues) values.push_back({z.real(), z.imag()});
  Json out{{"eigenvalues", values},
           {"eigenvalue_moduli", r.eigenvalue_moduli},
           {"spectral_gap", nullptr},
           {"absolute_gap", r.absolute_gap},
           {"is_ergodic", r.is_ergodic},
           {"is_symmetric", r.is_symmetric},
           {"doubly_stochastic", r.doubly_stochastic},
           {"ds_deviation", r.ds_deviation},
           {"warnings", r.warnings}};
  if (r.spectral_gap) out["spectral_gap"] = *r.spectral_gap;
  return out;
}

Json to_json(const SquashSpec& s) {
  return Json{{"kind", to_string(s.kind)}, {"beta", s.beta}, {"epsilon", s.epsilon}, {"rho", s.rho}};
}

SquashSpec squash_from_json(const Json& j) {
  SquashSpec s;
  s.kind = squash_kind_from_string(field_or<std::string>(j, "kind", "sigmoid"));
  s.beta = field_or(j, "beta", s.beta);
  s.epsilon = field_or(j, "epsilon", s.epsilon);
  s.rho = field_or(j, "rho", s.rho);
  s.validate();
  return s;
}

Json to_json(const SpectralShaping& s) {
  return Json{{"identity_weight", s.identity_weight}, {"uniform_weight", s.uniform_weight}, {"post_delta", s.post_delta}};
}

SpectralShaping shaping_from_json(const Json& j) {
  SpectralShaping s;
  s.identity_weight = field_or(j, "identity_weight", 0.0);
  s.uniform_weight = field_or(j, "uniform_weight", 0.0);
  s.post_delta = field_or(j, "post_delta", 0.0);
  s.validate();
  return s;
}

Json to_json(const AveragingSpec& s) { return Json{{"permutations", s.permutations}, {"weights", s.weights}}; }

AveragingSpec averaging_from_json(const Json& j) {
  AveragingSpec s;
  s.permutations = field<std::vector<std::vector<std::size_t>>>(j, "permutations");
  s.weights = field<Vector>(j, "weights");
  return s;
}

Json to_json(const MixerSpec& s) {
  Json out{{"kind", to_string(s.kind)},
           {"n", s.n},
           {"squash", to_json(s.squash)},
           {"shaping", to_json(s.shaping)},
           {"averaging", nullptr},
           {"sinkhorn_iterations", s.sinkhorn_iterations},
           {"kron_factors", s.kron_factors}};
  if (s.averaging) out["averaging"] = to_json(*s.averaging);
  return out;
}

MixerSpec mixer_from_json(const Json& j) {
  MixerSpec s;
  s.kind = mixer_kind_from_string(field<std::string>(j, "kind"));
  s.n = field<std::size_t>(j, "n");
  if (j.contains("squash")) s.squash = squash_from_json(j.at("squash"));
  if (j.contains("shaping")) s.shaping = shaping_from_json(j.at("shaping"));
  if (j.contains("averaging") && !j.at("averaging").is_null()) s.averaging = averaging_from_json(j.at("averaging"));
  s.sinkhorn_iterations = field_or(j, "sinkhorn_iterations", s.sinkhorn_iterations);
  s.kron_factors = field_or(j, "kron_factors", s.kron_factors);
  s.validate();
  return s;
}

Json to_json(const OptimizerGroupConfig& c) {
  return Json{{"chart_lr_multiplier", c.chart_lr_multiplier}, {"scale_lr_multiplier", c.scale_lr_multiplier},
              {"delta_lr_multiplier", c.delta_lr_multiplier}, {"chart_clip", c.chart_clip},
              {"scale_clip", c.scale_clip},                   {"delta_clip", c.delta_clip},
              {"weight_decay", c.weight_decay}};
}

OptimizerGroupConfig optimizer_from_json(const Json& j) {
  OptimizerGroupConfig c;
  c.chart_lr_multiplier = field_or(j, "chart_lr_multiplier", c.chart_lr_multiplier);
  c.scale_lr_multiplier = field_or(j, "scale_lr_multiplier", c.scale_lr_multiplier);
  c.delta_lr_multiplier = field_or(j, "delta_lr_multiplier", c.delta_lr_multiplier);
  c.chart_clip = field_or(j, "chart_clip", c.chart_clip);
  c.scale_clip = field_or(j, "scale_clip", c.scale_clip);
  c.delta_clip = field_or(j, "delta_clip", c.delta_clip);
  c.weight_decay = field_or(j, "weight_decay", c.weight_decay);
  return c;
}

Json to_json(const LayerWeights& w) {
  Json out{{"n", w.n},
           {"width", w.width},
           {"w_pre", to_json(w.w_pre)},
           {"w_post", to_json(w.w_post)},
           {"b_pre", w.b_pre},
           {"b_post", w.b_post},
           {"alpha_pre", w.alpha_pre},
           {"alpha_post", w.alpha_post},
           {"alpha_res", w.alpha_res},
           {"w_res", nullptr},
           {"b_res", w.b_res},
           {"mixer", to_json(w.mixer)},
           {"gate", w.gate == GateForm::Mhc ? "mhc" : "hc"}};
  if (w.dynamic()) out["w_res"] = to_json(w.w_res);
  return out;
}

LayerWeights layer_from_json(const Json& j) {
  LayerWeights w;
  w.n = field<std::size_t>(j, "n");
  w.width = field<std::size_t>(j, "width");
  w.w_pre = matrix_from_json(member(j, "w_pre"));
  w.w_post = matrix_from_json(member(j, "w_post"));
  w.b_pre = field<Vector>(j, "b_pre");
  w.b_post = field<Vector>(j, "b_post");
  w.alpha_pre = field_or(j, "alpha_pre", w.alpha_pre);
  w.alpha_post = field_or(j, "alpha_post", w.alpha_post);
  w.alpha_res = field_or(j, "alpha_res", w.alpha_res);
  if (j.contains("w_res") && !j.at("w_res").is_null()) w.w_res = matrix_from_json(j.at("w_res"));
  w.b_res = field<Vector>(j, "b_res");
  w.mixer = mixer_from_json(member(j, "mixer"));
  const auto gate = field_or<std::string>(j, "gate", "mhc");
  if (gate == "mhc") {
    w.gate = GateForm::Mhc;
  } else if (gate == "hc") {
    w.gate = GateForm::Hc;
  } else {
    fail(ErrorKind::InvalidArgument, "gate must be \"mhc\" or \"hc\"");
  }
  w.validate();
  return w;
}

Json to_json(const RtbpTrace& trace) {
  Json chips = Json::array();
  for (const auto& c : trace.chips) {
    chips.push_back({{"axis", c.axis == ChipOff::Axis::Row ? "row" : "column"}, {"index", c.index}, {"values", c.values}});
  }
  std::vector<Json> nodes;
  nodes.reserve(trace.nodes.size());
  for (const auto& s : trace.nodes) {
    nodes.push_back({{"row_offset", s.row_offset}, {"col_offset", s.col_offset}, {"n", s.n}, {"m", s.m},
                     {"k", s.k}, {"l", s.l}, {"depth", s.depth}, {"row_sums", s.row_sums},
                     {"col_sums", s.col_sums}, {"m11", s.m11}, {"m12", s.m12}, {"m21", s.m21},
                     {"m22", s.m22}, {"r_prime", s.r_prime}, {"r_dprime", s.r_dprime},
                     {"c_prime", s.c_prime}, {"c_dprime", s.c_dprime}, {"children", Json::array()}});
  }
  // children are always recorded after their parent
  Json roots = Json::array();
  for (std::size_t i = trace.nodes.size(); i-- > 0;) {
    const int p = trace.nodes[i].parent;
    if (p < 0) {
      roots.insert(roots.begin(), std::move(nodes[i]));
    } else {
      auto& kids = nodes[static_cast<std::size_t>(p)]["children"];
      kids.insert(kids.begin(), std::move(nodes[i]));
    }
  }
  return Json{{"chips", chips}, {"splits", roots}};
}

std::string chain_csv(const std::vector<ChainStep>& steps) {
  std::string out = "step,row_dev,col_dev\n";
  for (const auto& s : steps) {
    out += std::to_string(s.step) + "," + number(s.row_deviation) + "," + number(s.col_deviation) + "\n";
  }
  return out;
}

std::string sweep_csv(const SweepTrace& trace) {
  std::string out = "layer,ds_deviation,grad_norm,mixer_deviation\n";
  for (const auto& r : trace.layers) {
    out += std::to_string(r.layer) + "," + number(r.ds_deviation) + "," + number(r.grad_norm) + "," +
           number(r.mixer_deviation) + "\n";
  }
  return out;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Io, path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed for " + path);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace birkhoff::io
