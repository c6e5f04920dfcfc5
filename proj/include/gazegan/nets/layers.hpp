#pragma once

#include <torch/torch.h>

#include <string>
#include <utility>
#include <vector>

namespace gazegan {

/// Output shapes recorded along a forward pass, in (h, w, c) order for feature
/// maps and (features) for vectors. The batch dimension is dropped.
struct LayerShape {
  std::string layer;
  std::vector<int64_t> dims;
};
using ShapeTrace = std::vector<LayerShape>;

void record_shape(ShapeTrace* trace, const std::string& layer, const torch::Tensor& t);

/// Persistent power-iteration vectors for one weight matrix.
struct PowerIterationState {
  torch::Tensor u;  // (rows)
  torch::Tensor v;  // (cols)
};

/// Reshapes `weight` to (out, -1), runs `iterations` power-iteration steps on
/// `state` (no gradient), and returns weight / sigma with sigma = u^T W v.
/// sigma is floored at `eps`, so an all-zero weight passes through unchanged.
torch::Tensor spectral_normalize(const torch::Tensor& weight, PowerIterationState& state,
                                 int iterations, double eps = 1e-12);

/// Power-iteration steps run when a state is created.
inline constexpr int kInitialPowerIterations = 200;

/// Random u, then kInitialPowerIterations steps on `weight`.
PowerIterationState make_power_iteration_state(const torch::Tensor& weight);

struct ConvSpec {
  int64_t in_channels = 0;
  int64_t out_channels = 0;
  int64_t kernel = 3;
  int64_t stride = 1;
  bool spectral_norm = false;
};

/// Convolution with "same" padding: output size ceil(in / stride), padding
/// split as total/2 before and the remainder after.
class Conv2dSameImpl : public torch::nn::Module {
 public:
  explicit Conv2dSameImpl(ConvSpec spec);

  torch::Tensor forward(const torch::Tensor& x);

  /// Weight used by forward: raw, or divided by the current sigma estimate.
  torch::Tensor effective_weight();
  /// One power-iteration step per call; no-op without spectral norm.
  void power_iterate(int steps = 1);

  const ConvSpec& spec() const { return spec_; }

  torch::Tensor weight;
  torch::Tensor bias;

 private:
  ConvSpec spec_;
  PowerIterationState sn_;
};
TORCH_MODULE(Conv2dSame);

/// Total and leading padding of a "same" convolution along one axis.
std::pair<int64_t, int64_t> same_padding(int64_t in, int64_t kernel, int64_t stride);

/// Normal(0, std) for conv, transposed-conv and linear weights; zero biases.
/// Instance-norm affine parameters keep their (1, 0) defaults.
void initialize_parameters(torch::nn::Module& module, double std);

}  // namespace gazegan
