#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "birkhoff/matrix.hpp"
#include "birkhoff/mixer.hpp"

namespace birkhoff {

enum class NormKind { Rms, Identity };

/// Normalization applied to the flattened stream before the maps. RMS has
/// no learnable gain.
struct Normalization {
  NormKind kind = NormKind::Rms;
  double epsilon = 1e-6;
};

/// Gate family for H_pre/H_post.
///   Mhc:  H_pre = σ(α x′W + b),        H_post = 2σ(α x′W + b)
///   Hc:   H_pre = α tanh(x′W) + b,     H_post = α tanh(x′W) + b
enum class GateForm { Mhc, Hc };

enum class SublayerKind { Zero, TanhAffine };

/// Sublayer F: 1×C → 1×C. TanhAffine computes tanh(y W + b).
struct Sublayer {
  SublayerKind kind = SublayerKind::Zero;
  Matrix weight;  // C×C
  Vector bias;    // C

  static Sublayer zero() { return {}; }
  static Sublayer tanh_affine(Matrix weight, Vector bias) {
    return {SublayerKind::TanhAffine, std::move(weight), std::move(bias)};
  }
};

struct LayerWeights {
  std::size_t n = 4;
  std::size_t width = 1;  // C
  Matrix w_pre;           // nC×n
  Matrix w_post;          // nC×n
  Vector b_pre;           // n
  Vector b_post;          // n
  double alpha_pre = 0.01;
  double alpha_post = 0.01;
  double alpha_res = 1.0;
  /// nC×P for an input-dependent mixer; empty for a static one, in which
  /// case b_res alone holds the mixer logits.
  Matrix w_res;
  Vector b_res;  // P = mixer.param_count()
  MixerSpec mixer;
  GateForm gate = GateForm::Mhc;

  void validate() const;
  bool dynamic() const noexcept { return !w_res.empty(); }

  /// Near-residual initialization: zero projections, pre/post biases −1
  /// except +1 on the last stream, α_pre = α_post = 0.01, mixer logits from
  /// default_logits().
  static LayerWeights initial(std::size_t n, std::size_t width, const MixerSpec& mixer, bool dynamic = false);
};

/// Per-group optimizer settings kept alongside the weights for reference
/// only; nothing in the library consumes them.
struct OptimizerGroupConfig {
  double chart_lr_multiplier = 1.0 / 6.0;
  double scale_lr_multiplier = 0.187;
  double delta_lr_multiplier = 0.05;
  double chart_clip = 0.3;
  double scale_clip = 0.3;
  double delta_clip = 0.05;
  double weight_decay = 0.0;
};

struct LayerMaps {
  Vector h_pre;   // 1×n
  Vector h_post;  // 1×n
  Matrix h_res;   // n×n
  std::optional<SinkhornResidual> residual;
};

LayerMaps layer_maps(std::span<const double> x_flat, const LayerWeights& weights, const Normalization& norm = {});

/// X_{l+1} = H_res X_l + H_postᵀ F(H_pre X_l).
Matrix layer_forward(const Matrix& x, const LayerWeights& weights, const Sublayer& sublayer = {},
                     const Normalization& norm = {});

struct SweepRecord {
  std::size_t layer = 0;
  /// Deviation from double stochasticity of the accumulated residual product
  /// H_res^(l) ⋯ H_res^(1).
  double ds_deviation = 0.0;
  /// ‖∂ℓ(X_l)/∂X_0‖_F with ℓ(X) = ½‖X‖_F².
  double grad_norm = 0.0;
  /// Deviation of this layer's own H_res.
  double mixer_deviation = 0.0;
};

struct SweepTrace {
  std::vector<SweepRecord> layers;
  Matrix output;
  Matrix gradient;  // ∂ℓ(X_L)/∂X_0
};

/// Runs the layers in sequence, tracking exact derivatives with respect to
/// X_0 by forward-mode differentiation through every map (charts included).
/// Limited to L ≤ 64, n ≤ 8, C ≤ 16.
SweepTrace depth_sweep(const std::vector<LayerWeights>& layers, const Matrix& x0, const Sublayer& sublayer = {},
                       const Normalization& norm = {});

/// ℓ(X) = ½‖X‖_F², the scalar loss used by depth_sweep.
double sweep_loss(const Matrix& x);

}  // namespace birkhoff
