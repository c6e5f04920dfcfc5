#pragma once

#include "gazegan/nets/layers.hpp"

#include <array>

namespace gazegan {

inline constexpr int64_t kContentDim = 256;
inline constexpr int64_t kAngleDim = 2;
inline constexpr int64_t kBottleneckDim = 256;
inline constexpr int64_t kDiscriminatorFeatureDim = 256;

/// Hyper-parameters shared by all networks. `channel_divisor` shrinks every
/// convolution width (never the latent sizes) for small test configurations.
struct NetworkConfig {
  int64_t resolution = 256;
  int64_t channel_divisor = 1;
  double leaky_slope = 0.2;
  double norm_eps = 1e-5;
  double init_std = 0.02;
  bool use_content_code = true;

  int64_t channels(int64_t canonical) const;
  void validate() const;
};

/// Strong types for the two latent codes, batched along dim 0.
struct AngleCode {
  torch::Tensor value;  // (N, 2)
};
struct ContentCode {
  torch::Tensor value;  // (N, 256)
};

/// Conv (same padding) -> optional instance norm -> leaky ReLU.
class DownBlockImpl : public torch::nn::Module {
 public:
  DownBlockImpl(const NetworkConfig& cfg, ConvSpec spec, bool normalize);
  torch::Tensor forward(const torch::Tensor& x);

  Conv2dSame conv{nullptr};
  torch::nn::InstanceNorm2d norm{nullptr};

 private:
  double slope_;
};
TORCH_MODULE(DownBlock);

/// 4x4 stride-2 transposed conv (exact 2x upsampling) -> instance norm -> leaky ReLU.
class UpBlockImpl : public torch::nn::Module {
 public:
  UpBlockImpl(const NetworkConfig& cfg, int64_t in_channels, int64_t out_channels);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::ConvTranspose2d deconv{nullptr};
  torch::nn::InstanceNorm2d norm{nullptr};

 private:
  double slope_;
};
TORCH_MODULE(UpBlock);

/// Masked face (N,4,H,W) -> bottleneck (N,256).
class InpaintEncoderImpl : public torch::nn::Module {
 public:
  explicit InpaintEncoderImpl(const NetworkConfig& cfg);
  torch::Tensor forward(const torch::Tensor& masked, ShapeTrace* trace = nullptr);

 private:
  torch::nn::ModuleList blocks_;
  torch::nn::Linear fc_{nullptr};
};
TORCH_MODULE(InpaintEncoder);

/// Latent (N,in_features) -> image (N,3,H,W) in [-1,1].
class InpaintDecoderImpl : public torch::nn::Module {
 public:
  InpaintDecoderImpl(const NetworkConfig& cfg, int64_t in_features);
  torch::Tensor forward(const torch::Tensor& latent, ShapeTrace* trace = nullptr);

  Conv2dSame output_conv{nullptr};

 private:
  int64_t base_channels_;
  int64_t base_size_;
  torch::nn::Linear fc_{nullptr};
  torch::nn::ModuleList blocks_;
};
TORCH_MODULE(InpaintDecoder);

/// G_x: decoder input is bottleneck + c.
class GeneratorXImpl : public torch::nn::Module {
 public:
  explicit GeneratorXImpl(const NetworkConfig& cfg);
  torch::Tensor forward(const torch::Tensor& masked, const ContentCode& c, ShapeTrace* trace = nullptr);

  InpaintEncoder encoder{nullptr};
  InpaintDecoder decoder{nullptr};

 private:
  NetworkConfig cfg_;
};
TORCH_MODULE(GeneratorX);

/// G_y: decoder input is concat(bottleneck + c, r), 258 wide.
class GeneratorYImpl : public torch::nn::Module {
 public:
  explicit GeneratorYImpl(const NetworkConfig& cfg);
  torch::Tensor forward(const torch::Tensor& masked, const AngleCode& r, const ContentCode& c,
                        ShapeTrace* trace = nullptr);

  InpaintEncoder encoder{nullptr};
  InpaintDecoder decoder{nullptr};

 private:
  NetworkConfig cfg_;
};
TORCH_MODULE(GeneratorY);

/// E_r: eye composite (N,3,H/2,W/2) -> angle code (N,2).
class AngleEncoderImpl : public torch::nn::Module {
 public:
  explicit AngleEncoderImpl(const NetworkConfig& cfg);
  AngleCode forward(const torch::Tensor& composite, ShapeTrace* trace = nullptr);

 private:
  torch::nn::ModuleList blocks_;
  torch::nn::Linear fc_{nullptr};
};
TORCH_MODULE(AngleEncoder);

struct AutoencoderOutput {
  ContentCode code;
  torch::Tensor reconstruction;
};

/// G_pre: eye-composite autoencoder whose encoder (E_c) yields the 256-wide
/// content code.
class ContentAutoencoderImpl : public torch::nn::Module {
 public:
  explicit ContentAutoencoderImpl(const NetworkConfig& cfg);
  ContentCode encode(const torch::Tensor& composite, ShapeTrace* trace = nullptr);
  torch::Tensor decode(const ContentCode& code, ShapeTrace* trace = nullptr);
  AutoencoderOutput forward(const torch::Tensor& composite, ShapeTrace* trace = nullptr);

 private:
  int64_t base_size_;
  torch::nn::ModuleList enc_blocks_;
  torch::nn::Linear enc_fc_{nullptr};
  torch::nn::Linear dec_fc_{nullptr};
  torch::nn::ModuleList dec_blocks_;
  Conv2dSame dec_out_{nullptr};
};
TORCH_MODULE(ContentAutoencoder);

/// Global branch on the face, local branch on the eye composite; both end in
/// a 256-wide FC, concatenated into FC(512) + leaky ReLU + FC(1). Every conv
/// is spectrally normalized. Returns logits of shape (N).
class DiscriminatorImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorImpl(const NetworkConfig& cfg);
  torch::Tensor forward(const torch::Tensor& face, const torch::Tensor& composite,
                        ShapeTrace* trace = nullptr);

  /// Advances every conv's power iteration by `steps`.
  void power_iterate(int steps = 1);
  std::vector<Conv2dSame> convolutions() const;

 private:
  torch::Tensor branch(std::vector<Conv2dSame>& convs, torch::nn::Linear& fc,
                       const torch::Tensor& x, const std::string& name, ShapeTrace* trace);

  double slope_;
  std::vector<Conv2dSame> global_convs_;
  std::vector<Conv2dSame> local_convs_;
  torch::nn::Linear global_fc_{nullptr};
  torch::nn::Linear local_fc_{nullptr};
  torch::nn::Linear merge_fc_{nullptr};
  torch::nn::Linear out_fc_{nullptr};
};
TORCH_MODULE(Discriminator);

/// Spatial size after `count` same-padded stride-2 convs.
int64_t halved(int64_t size, int count);

}  // namespace gazegan
