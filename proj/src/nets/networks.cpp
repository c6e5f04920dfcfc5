#include "gazegan/nets/networks.hpp"

#include "gazegan/error.hpp"

namespace gazegan {

namespace F = torch::nn::functional;

int64_t NetworkConfig::channels(int64_t canonical) const {
  return std::max<int64_t>(1, canonical / channel_divisor);
}

void NetworkConfig::validate() const {
  if (resolution < 32 || resolution % 32 != 0) {
    throw Error(ErrorKind::Config, "resolution must be a positive multiple of 32, got " +
                                       std::to_string(resolution));
  }
  if (channel_divisor < 1) throw Error(ErrorKind::Config, "channel_divisor must be >= 1");
  if (!(leaky_slope >= 0.0) || !(norm_eps > 0.0) || !(init_std > 0.0)) {
    throw Error(ErrorKind::Config, "invalid network constants");
  }
}

int64_t halved(int64_t size, int count) {
  for (int i = 0; i < count; ++i) size = (size + 1) / 2;
  return size;
}

namespace {

torch::nn::InstanceNorm2d instance_norm(const NetworkConfig& cfg, int64_t channels) {
  return torch::nn::InstanceNorm2d(
      torch::nn::InstanceNorm2dOptions(channels).eps(cfg.norm_eps).affine(true).track_running_stats(false));
}

void check_input(const torch::Tensor& t, int64_t channels, int64_t size, const char* what) {
  if (t.dim() != 4 || t.size(1) != channels || t.size(2) != size || t.size(3) != size) {
    throw Error(ErrorKind::Shape, std::string(what) + ": expected (N," + std::to_string(channels) +
                                      "," + std::to_string(size) + "," + std::to_string(size) +
                                      ") input");
  }
}

void check_code(const torch::Tensor& t, int64_t batch, int64_t dim, const char* what) {
  if (t.dim() != 2 || t.size(0) != batch || t.size(1) != dim) {
    throw Error(ErrorKind::Shape, std::string(what) + ": expected a (N," + std::to_string(dim) +
                                      ") code");
  }
}

}  // namespace

DownBlockImpl::DownBlockImpl(const NetworkConfig& cfg, ConvSpec spec, bool normalize)
    : slope_(cfg.leaky_slope) {
  conv = register_module("conv", Conv2dSame(spec));
  if (normalize) norm = register_module("norm", instance_norm(cfg, spec.out_channels));
}

torch::Tensor DownBlockImpl::forward(const torch::Tensor& x) {
  auto y = conv->forward(x);
  if (norm) y = norm->forward(y);
  return F::leaky_relu(y, F::LeakyReLUFuncOptions().negative_slope(slope_));
}

UpBlockImpl::UpBlockImpl(const NetworkConfig& cfg, int64_t in_channels, int64_t out_channels)
    : slope_(cfg.leaky_slope) {
  deconv = register_module(
      "deconv", torch::nn::ConvTranspose2d(
                    torch::nn::ConvTranspose2dOptions(in_channels, out_channels, 4).stride(2).padding(1)));
  norm = register_module("norm", instance_norm(cfg, out_channels));
}

torch::Tensor UpBlockImpl::forward(const torch::Tensor& x) {
  return F::leaky_relu(norm->forward(deconv->forward(x)),
                       F::LeakyReLUFuncOptions().negative_slope(slope_));
}

// ---------------------------------------------------------------------------

InpaintEncoderImpl::InpaintEncoderImpl(const NetworkConfig& cfg) {
  cfg.validate();
  const int64_t c16 = cfg.channels(16), c32 = cfg.channels(32), c64 = cfg.channels(64),
                c128 = cfg.channels(128), c256 = cfg.channels(256);
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  blocks_->push_back(DownBlock(cfg, ConvSpec{4, c16, 7, 1}, true));
  blocks_->push_back(DownBlock(cfg, ConvSpec{c16, c32, 4, 2}, true));
  blocks_->push_back(DownBlock(cfg, ConvSpec{c32, c64, 4, 2}, true));
  blocks_->push_back(DownBlock(cfg, ConvSpec{c64, c128, 4, 2}, true));
  blocks_->push_back(DownBlock(cfg, ConvSpec{c128, c256, 4, 2}, true));
  blocks_->push_back(DownBlock(cfg, ConvSpec{c256, c256, 4, 2}, true));
  const int64_t s = cfg.resolution / 32;
  fc_ = register_module("fc", torch::nn::Linear(c256 * s * s, kBottleneckDim));
}

torch::Tensor InpaintEncoderImpl::forward(const torch::Tensor& masked, ShapeTrace* trace) {
  record_shape(trace, "encoder.input", masked);
  auto x = masked;
  int i = 0;
  for (auto& block : *blocks_) {
    x = block->as<DownBlockImpl>()->forward(x);
    record_shape(trace, "encoder.conv" + std::to_string(++i), x);
  }
  x = fc_->forward(x.flatten(1));
  record_shape(trace, "encoder.fc", x);
  return x;
}

InpaintDecoderImpl::InpaintDecoderImpl(const NetworkConfig& cfg, int64_t in_features) {
  cfg.validate();
  base_channels_ = cfg.channels(256);
  base_size_ = cfg.resolution / 32;
  fc_ = register_module("fc", torch::nn::Linear(in_features, base_channels_ * base_size_ * base_size_));
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  const int64_t widths[] = {256, 128, 64, 32, 16, 16};
  for (int i = 0; i < 5; ++i) {
    blocks_->push_back(UpBlock(cfg, cfg.channels(widths[i]), cfg.channels(widths[i + 1])));
  }
  output_conv = register_module("output", Conv2dSame(ConvSpec{cfg.channels(16), 3, 7, 1}));
}

torch::Tensor InpaintDecoderImpl::forward(const torch::Tensor& latent, ShapeTrace* trace) {
  record_shape(trace, "decoder.input", latent);
  auto x = fc_->forward(latent).view({latent.size(0), base_channels_, base_size_, base_size_});
  record_shape(trace, "decoder.fc", x);
  int i = 0;
  for (auto& block : *blocks_) {
    x = block->as<UpBlockImpl>()->forward(x);
    record_shape(trace, "decoder.deconv" + std::to_string(++i), x);
  }
  x = torch::tanh(output_conv->forward(x));
  record_shape(trace, "decoder.output", x);
  return x;
}

GeneratorXImpl::GeneratorXImpl(const NetworkConfig& cfg) : cfg_(cfg) {
  encoder = register_module("encoder", InpaintEncoder(cfg));
  decoder = register_module("decoder", InpaintDecoder(cfg, kBottleneckDim));
}

torch::Tensor GeneratorXImpl::forward(const torch::Tensor& masked, const ContentCode& c,
                                      ShapeTrace* trace) {
  check_input(masked, 4, cfg_.resolution, "G_x");
  check_code(c.value, masked.size(0), kContentDim, "G_x");
  auto b = encoder->forward(masked, trace);
  return decoder->forward(b + c.value, trace);
}

GeneratorYImpl::GeneratorYImpl(const NetworkConfig& cfg) : cfg_(cfg) {
  encoder = register_module("encoder", InpaintEncoder(cfg));
  decoder = register_module("decoder", InpaintDecoder(cfg, kBottleneckDim + kAngleDim));
}

torch::Tensor GeneratorYImpl::forward(const torch::Tensor& masked, const AngleCode& r,
                                      const ContentCode& c, ShapeTrace* trace) {
  check_input(masked, 4, cfg_.resolution, "G_y");
  check_code(c.value, masked.size(0), kContentDim, "G_y");
  check_code(r.value, masked.size(0), kAngleDim, "G_y");
  auto b = encoder->forward(masked, trace);
  return decoder->forward(torch::cat({b + c.value, r.value}, 1), trace);
}

// ---------------------------------------------------------------------------

AngleEncoderImpl::AngleEncoderImpl(const NetworkConfig& cfg) {
  cfg.validate();
  const int64_t c32 = cfg.channels(32), c64 = cfg.channels(64), c128 = cfg.channels(128);
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  blocks_->push_back(DownBlock(cfg, ConvSpec{3, c32, 7, 1}, true));
  blocks_->push_back(DownBlock(cfg, ConvSpec{c32, c64, 4, 2}, true));
  blocks_->push_back(DownBlock(cfg, ConvSpec{c64, c128, 4, 2}, true));
  blocks_->push_back(DownBlock(cfg, ConvSpec{c128, c128, 4, 2}, true));
  const int64_t s = cfg.resolution / 16;
  fc_ = register_module("fc", torch::nn::Linear(c128 * s * s, kAngleDim));
}

AngleCode AngleEncoderImpl::forward(const torch::Tensor& composite, ShapeTrace* trace) {
  if (composite.dim() != 4 || composite.size(1) != 3) {
    throw Error(ErrorKind::Shape, "E_r: expected an (N,3,H/2,W/2) composite");
  }
  record_shape(trace, "angle.input", composite);
  auto x = composite;
  int i = 0;
  for (auto& block : *blocks_) {
    x = block->as<DownBlockImpl>()->forward(x);
    record_shape(trace, "angle.conv" + std::to_string(++i), x);
  }
  x = fc_->forward(x.flatten(1));
  record_shape(trace, "angle.fc", x);
  return AngleCode{x};
}

ContentAutoencoderImpl::ContentAutoencoderImpl(const NetworkConfig& cfg) {
  cfg.validate();
  const int64_t c16 = cfg.channels(16), c32 = cfg.channels(32), c64 = cfg.channels(64),
                c128 = cfg.channels(128), c256 = cfg.channels(256);
  base_size_ = cfg.resolution / 16;
  enc_blocks_ = register_module("enc_blocks", torch::nn::ModuleList());
  enc_blocks_->push_back(DownBlock(cfg, ConvSpec{3, c16, 7, 1}, true));
  enc_blocks_->push_back(DownBlock(cfg, ConvSpec{c16, c32, 4, 2}, true));
  enc_blocks_->push_back(DownBlock(cfg, ConvSpec{c32, c64, 4, 2}, true));
  enc_blocks_->push_back(DownBlock(cfg, ConvSpec{c64, c128, 4, 2}, true));
  enc_fc_ = register_module("enc_fc", torch::nn::Linear(c128 * base_size_ * base_size_, kContentDim));
  dec_fc_ = register_module("dec_fc", torch::nn::Linear(kContentDim, c256 * base_size_ * base_size_));
  dec_blocks_ = register_module("dec_blocks", torch::nn::ModuleList());
  dec_blocks_->push_back(UpBlock(cfg, c256, c128));
  dec_blocks_->push_back(UpBlock(cfg, c128, c64));
  dec_blocks_->push_back(UpBlock(cfg, c64, c32));
  dec_out_ = register_module("dec_out", Conv2dSame(ConvSpec{c32, 3, 7, 1}));
}

ContentCode ContentAutoencoderImpl::encode(const torch::Tensor& composite, ShapeTrace* trace) {
  if (composite.dim() != 4 || composite.size(1) != 3) {
    throw Error(ErrorKind::Shape, "E_c: expected an (N,3,H/2,W/2) composite");
  }
  record_shape(trace, "content.input", composite);
  auto x = composite;
  int i = 0;
  for (auto& block : *enc_blocks_) {
    x = block->as<DownBlockImpl>()->forward(x);
    record_shape(trace, "content.conv" + std::to_string(++i), x);
  }
  x = enc_fc_->forward(x.flatten(1));
  record_shape(trace, "content.fc", x);
  return ContentCode{x};
}

torch::Tensor ContentAutoencoderImpl::decode(const ContentCode& code, ShapeTrace* trace) {
  auto x = dec_fc_->forward(code.value).view({code.value.size(0), -1, base_size_, base_size_});
  record_shape(trace, "reconstruct.fc", x);
  int i = 0;
  for (auto& block : *dec_blocks_) {
    x = block->as<UpBlockImpl>()->forward(x);
    record_shape(trace, "reconstruct.deconv" + std::to_string(++i), x);
  }
  x = torch::tanh(dec_out_->forward(x));
  record_shape(trace, "reconstruct.output", x);
  return x;
}

AutoencoderOutput ContentAutoencoderImpl::forward(const torch::Tensor& composite, ShapeTrace* trace) {
  auto code = encode(composite, trace);
  auto recon = decode(code, trace);
  return {code, recon};
}

// ---------------------------------------------------------------------------

DiscriminatorImpl::DiscriminatorImpl(const NetworkConfig& cfg) : slope_(cfg.leaky_slope) {
  cfg.validate();
  const int64_t widths[] = {3, cfg.channels(32), cfg.channels(64), cfg.channels(128),
                            cfg.channels(256), cfg.channels(256), cfg.channels(256)};
  for (int i = 0; i < 6; ++i) {
    ConvSpec spec{widths[i], widths[i + 1], 4, 2, /*spectral_norm=*/true};
    global_convs_.push_back(register_module("global_conv" + std::to_string(i + 1), Conv2dSame(spec)));
    local_convs_.push_back(register_module("local_conv" + std::to_string(i + 1), Conv2dSame(spec)));
  }
  const int64_t g = halved(cfg.resolution, 6);
  const int64_t l = halved(cfg.resolution / 2, 6);
  global_fc_ = register_module("global_fc", torch::nn::Linear(widths[6] * g * g, kDiscriminatorFeatureDim));
  local_fc_ = register_module("local_fc", torch::nn::Linear(widths[6] * l * l, kDiscriminatorFeatureDim));
  merge_fc_ = register_module("merge_fc", torch::nn::Linear(2 * kDiscriminatorFeatureDim, 512));
  out_fc_ = register_module("out_fc", torch::nn::Linear(512, 1));
}

torch::Tensor DiscriminatorImpl::branch(std::vector<Conv2dSame>& convs, torch::nn::Linear& fc,
                                        const torch::Tensor& x, const std::string& name,
                                        ShapeTrace* trace) {
  record_shape(trace, name + ".input", x);
  auto h = x;
  for (size_t i = 0; i < convs.size(); ++i) {
    h = F::leaky_relu(convs[i]->forward(h), F::LeakyReLUFuncOptions().negative_slope(slope_));
    record_shape(trace, name + ".conv" + std::to_string(i + 1), h);
  }
  h = fc->forward(h.flatten(1));
  record_shape(trace, name + ".fc", h);
  return h;
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& face, const torch::Tensor& composite,
                                         ShapeTrace* trace) {
  if (face.dim() != 4 || composite.dim() != 4 || face.size(0) != composite.size(0) ||
      face.size(1) != 3 || composite.size(1) != 3) {
    throw Error(ErrorKind::Shape, "D: expected (N,3,H,W) face and (N,3,H/2,W/2) composite");
  }
  auto g = branch(global_convs_, global_fc_, face, "global", trace);
  auto l = branch(local_convs_, local_fc_, composite, "local", trace);
  auto h = torch::cat({g, l}, 1);
  record_shape(trace, "merge.input", h);
  h = F::leaky_relu(merge_fc_->forward(h), F::LeakyReLUFuncOptions().negative_slope(slope_));
  record_shape(trace, "merge.fc", h);
  h = out_fc_->forward(h);
  record_shape(trace, "merge.out", h);
  return h.squeeze(1);
}

void DiscriminatorImpl::power_iterate(int steps) {
  for (auto& c : global_convs_) c->power_iterate(steps);
  for (auto& c : local_convs_) c->power_iterate(steps);
}

std::vector<Conv2dSame> DiscriminatorImpl::convolutions() const {
  std::vector<Conv2dSame> all = global_convs_;
  all.insert(all.end(), local_convs_.begin(), local_convs_.end());
  return all;
}

}  // namespace gazegan
