#include "birkhoff/mixer.hpp"

#include "mixer_kernels.hpp"

namespace birkhoff {

std::string to_string(MixerKind kind) {
  switch (kind) {
    case MixerKind::Tbp: return "tbp";
    case MixerKind::Rtbp: return "rtbp";
    case MixerKind::Bvn: return "bvn";
    case MixerKind::Kron: return "kron";
    case MixerKind::Sinkhorn: return "sinkhorn";
  }
  return "tbp";
}

MixerKind mixer_kind_from_string(const std::string& name) {
  if (name == "tbp") return MixerKind::Tbp;
  if (name == "rtbp") return MixerKind::Rtbp;
  if (name == "bvn") return MixerKind::Bvn;
  if (name == "kron") return MixerKind::Kron;
  if (name == "sinkhorn") return MixerKind::Sinkhorn;
  fail(ErrorKind::InvalidArgument, "unknown mixer kind '" + name + "'");
}

void MixerSpec::validate() const {
  if (n < 1) fail(ErrorKind::InvalidArgument, "mixer size must be positive");
  squash.validate();
  shaping.validate();
  if (averaging) {
    if (kind != MixerKind::Tbp && kind != MixerKind::Rtbp) {
      fail(ErrorKind::InvalidArgument, "averaging applies to tbp and rtbp only");
    }
    averaging->validate(n);
  }
  switch (kind) {
    case MixerKind::Bvn:
      bvn_logit_count(n);
      break;
    case MixerKind::Kron: {
      if (kron_factors.empty()) fail(ErrorKind::InvalidArgument, "kron mixer needs factor sizes");
      std::size_t prod = 1;
      for (const std::size_t s : kron_factors) {
        if (s < 2) fail(ErrorKind::InvalidArgument, "Kronecker factors must have size >= 2");
        bvn_logit_count(s);
        prod *= s;
      }
      if (prod != n) fail(ErrorKind::DimensionMismatch, "Kronecker factor sizes must multiply to n");
      break;
    }
    case MixerKind::Sinkhorn:
      if (sinkhorn_iterations < 1) fail(ErrorKind::InvalidArgument, "sinkhorn needs at least one iteration");
      break;
    default:
      break;
  }
}

std::size_t MixerSpec::param_count() const {
  switch (kind) {
    case MixerKind::Tbp:
    case MixerKind::Rtbp:
      return chart_dimension(n, n) * (averaging ? averaging->permutations.size() : 1);
    case MixerKind::Bvn:
      return bvn_logit_count(n);
    case MixerKind::Kron: {
      std::size_t total = 0;
      for (const std::size_t s : kron_factors) total += bvn_logit_count(s);
      return total;
    }
    case MixerKind::Sinkhorn:
      return n * n;
  }
  return 0;
}

MixerOutput build_mixer(const MixerSpec& spec, std::span<const double> logits) {
  spec.validate();
  MixerOutput out;
  SinkhornResidual residual;
  out.matrix = detail::mixer_of<double>(spec, logits, &residual);
  if (spec.kind == MixerKind::Sinkhorn) out.residual = residual;
  return out;
}

Matrix mixer_jacobian(const MixerSpec& spec, std::span<const double> logits) {
  spec.validate();
  const auto seeds = detail::seed_variables(logits);
  const auto h = detail::mixer_of<detail::Dual>(spec, std::span<const detail::Dual>(seeds), nullptr);
  return detail::jacobian_of(h, logits.size());
}

Vector default_logits(const MixerSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case MixerKind::Tbp:
    case MixerKind::Rtbp:
      return Vector(spec.param_count(), spec.squash.kind == SquashKind::LinearClipped ? 0.5 : 0.0);
    case MixerKind::Bvn:
      return identity_biased_bvn_logits(spec.n);
    case MixerKind::Kron: {
      Vector z;
      for (const std::size_t s : spec.kron_factors) {
        const auto f = identity_biased_bvn_logits(s);
        z.insert(z.end(), f.begin(), f.end());
      }
      return z;
    }
    case MixerKind::Sinkhorn: {
      const auto m = identity_biased_logits(spec.n);
      return m.storage();
    }
  }
  return {};
}

}  // namespace birkhoff
