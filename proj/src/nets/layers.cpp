#include "gazegan/nets/layers.hpp"

#include "gazegan/error.hpp"

namespace gazegan {

namespace F = torch::nn::functional;

void record_shape(ShapeTrace* trace, const std::string& layer, const torch::Tensor& t) {
  if (!trace) return;
  if (t.dim() == 4) {
    trace->push_back({layer, {t.size(2), t.size(3), t.size(1)}});
  } else if (t.dim() == 2) {
    trace->push_back({layer, {t.size(1)}});
  } else {
    trace->push_back({layer, std::vector<int64_t>(t.sizes().begin() + 1, t.sizes().end())});
  }
}

PowerIterationState make_power_iteration_state(const torch::Tensor& weight) {
  torch::NoGradGuard guard;
  auto mat = weight.reshape({weight.size(0), -1});
  PowerIterationState s;
  s.u = F::normalize(torch::randn({mat.size(0)}, mat.options()),
                     F::NormalizeFuncOptions().dim(0).eps(1e-12));
  s.v = F::normalize(torch::mv(mat.t(), s.u), F::NormalizeFuncOptions().dim(0).eps(1e-12));
  // Random starts are far from the top singular pair when the spectrum is
  // flat (as at init); one step per update would take thousands of updates
  // to catch up.
  for (int i = 0; i < kInitialPowerIterations; ++i) {
    s.u = F::normalize(torch::mv(mat, s.v), F::NormalizeFuncOptions().dim(0).eps(1e-12));
    s.v = F::normalize(torch::mv(mat.t(), s.u), F::NormalizeFuncOptions().dim(0).eps(1e-12));
  }
  return s;
}

torch::Tensor spectral_normalize(const torch::Tensor& weight, PowerIterationState& state,
                                 int iterations, double eps) {
  auto mat = weight.reshape({weight.size(0), -1});
  if (!state.u.defined() || state.u.size(0) != mat.size(0)) {
    throw Error(ErrorKind::Shape, "spectral_normalize: power-iteration state does not match weight");
  }
  {
    torch::NoGradGuard guard;
    auto w = mat.detach();
    if (state.u.scalar_type() != w.scalar_type()) {
      state.u = state.u.to(w.scalar_type());
      state.v = state.v.to(w.scalar_type());
    }
    for (int i = 0; i < iterations; ++i) {
      state.v = F::normalize(torch::mv(w.t(), state.u), F::NormalizeFuncOptions().dim(0).eps(eps));
      state.u = F::normalize(torch::mv(w, state.v), F::NormalizeFuncOptions().dim(0).eps(eps));
    }
  }
  auto sigma = torch::dot(state.u, torch::mv(mat, state.v)).clamp_min(eps);
  return weight / sigma;
}

std::pair<int64_t, int64_t> same_padding(int64_t in, int64_t kernel, int64_t stride) {
  const int64_t out = (in + stride - 1) / stride;
  const int64_t total = std::max<int64_t>((out - 1) * stride + kernel - in, 0);
  return {total, total / 2};
}

Conv2dSameImpl::Conv2dSameImpl(ConvSpec spec) : spec_(spec) {
  weight = register_parameter(
      "weight", torch::empty({spec.out_channels, spec.in_channels, spec.kernel, spec.kernel}));
  bias = register_parameter("bias", torch::zeros({spec.out_channels}));
  {
    torch::NoGradGuard guard;
    weight.normal_(0.0, 0.02);
  }
  if (spec.spectral_norm) {
    sn_ = make_power_iteration_state(weight);
    sn_.u = register_buffer("sn_u", sn_.u);
    sn_.v = register_buffer("sn_v", sn_.v);
  }
}

torch::Tensor Conv2dSameImpl::effective_weight() {
  if (!spec_.spectral_norm) return weight;
  // Buffers may have been replaced by to()/load; re-read them.
  sn_.u = named_buffers()["sn_u"];
  sn_.v = named_buffers()["sn_v"];
  return spectral_normalize(weight, sn_, 0);
}

void Conv2dSameImpl::power_iterate(int steps) {
  if (!spec_.spectral_norm || steps <= 0) return;
  auto u = named_buffers()["sn_u"];
  auto v = named_buffers()["sn_v"];
  PowerIterationState s{u.clone(), v.clone()};
  spectral_normalize(weight.detach(), s, steps);
  torch::NoGradGuard guard;
  u.copy_(s.u);
  v.copy_(s.v);
}

torch::Tensor Conv2dSameImpl::forward(const torch::Tensor& x) {
  const auto [th, ph] = same_padding(x.size(2), spec_.kernel, spec_.stride);
  const auto [tw, pw] = same_padding(x.size(3), spec_.kernel, spec_.stride);
  auto padded = (th > 0 || tw > 0) ? F::pad(x, F::PadFuncOptions({pw, tw - pw, ph, th - ph})) : x;
  return F::conv2d(padded, effective_weight(), F::Conv2dFuncOptions().bias(bias).stride(spec_.stride));
}

void initialize_parameters(torch::nn::Module& module, double std) {
  torch::NoGradGuard guard;
  for (auto& m : module.modules(/*include_self=*/true)) {
    if (auto* conv = m->as<Conv2dSameImpl>()) {
      conv->weight.normal_(0.0, std);
      conv->bias.zero_();
      if (conv->spec().spectral_norm) {
        auto fresh = make_power_iteration_state(conv->weight);
        conv->named_buffers()["sn_u"].copy_(fresh.u);
        conv->named_buffers()["sn_v"].copy_(fresh.v);
      }
    } else if (auto* deconv = m->as<torch::nn::ConvTranspose2dImpl>()) {
      deconv->weight.normal_(0.0, std);
      if (deconv->bias.defined()) deconv->bias.zero_();
    } else if (auto* linear = m->as<torch::nn::LinearImpl>()) {
      linear->weight.normal_(0.0, std);
      if (linear->bias.defined()) linear->bias.zero_();
    }
  }
}

}  // namespace gazegan
