#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "birkhoff/baselines.hpp"
#include "birkhoff/hc_layer.hpp"
#include "birkhoff/mixer.hpp"
#include "birkhoff/rtbp.hpp"
#include "birkhoff/spectral.hpp"
#include "birkhoff/transport.hpp"

namespace birkhoff::io {

using Json = nlohmann::json;

Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

/// {"n", "m", "row_sums", "col_sums", "entries"}
Json to_json(const TransportMatrix& t);
/// Validates margins and entries at the given tolerance.
TransportMatrix transport_from_json(const Json& j, double tol = kMarginTolerance);

Json to_json(const ChartParams& p);
ChartParams params_from_json(const Json& j);

Json to_json(const SinkhornResidual& r);
Json to_json(const SpectralReport& r);

Json to_json(const SquashSpec& s);
SquashSpec squash_from_json(const Json& j);
Json to_json(const SpectralShaping& s);
SpectralShaping shaping_from_json(const Json& j);
Json to_json(const AveragingSpec& s);
AveragingSpec averaging_from_json(const Json& j);
Json to_json(const MixerSpec& s);
MixerSpec mixer_from_json(const Json& j);

Json to_json(const OptimizerGroupConfig& c);
OptimizerGroupConfig optimizer_from_json(const Json& j);
Json to_json(const LayerWeights& w);
LayerWeights layer_from_json(const Json& j);

/// Splits nested by parent, chip-offs listed first.
Json to_json(const RtbpTrace& trace);

/// step,row_dev,col_dev
std::string chain_csv(const std::vector<ChainStep>& steps);
/// layer,ds_deviation,grad_norm,mixer_deviation
std::string sweep_csv(const SweepTrace& trace);

Json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);
/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace birkhoff::io
