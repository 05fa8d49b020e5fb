#include "cyclegan/models.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <sstream>

#include "cyclegan/errors.hpp"

namespace cyclegan {

namespace {

namespace nnf = torch::nn::functional;

torch::Tensor reflect_pad(const torch::Tensor& x, int64_t pad) {
  return torch::reflection_pad2d(x, {pad, pad, pad, pad});
}

torch::Tensor maybe_norm(const torch::Tensor& x, NormKind kind) {
  return kind == NormKind::Instance ? instance_norm(x) : x;
}

void require_positive(int value, const std::string& field) {
  if (value <= 0) throw ConfigError(field, "must be positive, got " + std::to_string(value));
}

void require_positive_list(const std::vector<int>& values, const std::string& field) {
  for (std::size_t i = 0; i < values.size(); ++i)
    require_positive(values[i], field + "[" + std::to_string(i) + "]");
}

std::string shape_string(torch::IntArrayRef sizes) {
  std::ostringstream out;
  out << sizes;
  return out.str();
}

int64_t conv_output(int64_t size, int kernel, int stride, int padding) {
  return (size + 2 * padding - kernel) / stride + 1;
}

void initialize(torch::nn::Module& module, uint64_t seed) {
  torch::NoGradGuard no_grad;
  auto gen = at::detail::createCPUGenerator(seed);
  for (auto& item : module.named_parameters()) {
    const std::string& name = item.key();
    auto& p = item.value();
    if (name.size() >= 4 && name.compare(name.size() - 4, 4, "bias") == 0) {
      p.zero_();
    } else {
      p.normal_(0.0, kInitStd, gen);
    }
  }
}

}  // namespace

std::string_view to_string(NormKind kind) {
  return kind == NormKind::Instance ? "instance" : "none";
}

NormKind norm_kind_from_string(std::string_view text) {
  if (text == "instance") return NormKind::Instance;
  if (text == "none") return NormKind::None;
  throw ConfigError("norm_kind", "expected 'instance' or 'none', got '" + std::string(text) + "'");
}

std::string_view to_string(NetworkRole role) {
  switch (role) {
    case NetworkRole::GeneratorXY: return "g_xy";
    case NetworkRole::GeneratorYX: return "f_yx";
    case NetworkRole::DiscriminatorX: return "d_x";
    case NetworkRole::DiscriminatorY: return "d_y";
  }
  return "unknown";
}

void GeneratorSpec::validate() const {
  require_positive(in_channels, "in_channels");
  require_positive(out_channels, "out_channels");
  if (encoder_channels.empty()) throw ConfigError("encoder_channels", "must not be empty");
  require_positive_list(encoder_channels, "encoder_channels");
  require_positive_list(decoder_channels, "decoder_channels");
  for (std::size_t i = 1; i < encoder_channels.size(); ++i) {
    if (encoder_channels[i] <= encoder_channels[i - 1])
      throw ConfigError("encoder_channels", "must be strictly increasing");
  }
  for (std::size_t i = 1; i < decoder_channels.size(); ++i) {
    if (decoder_channels[i] >= decoder_channels[i - 1])
      throw ConfigError("decoder_channels", "must be strictly decreasing");
  }
  if (decoder_channels.size() + 1 != encoder_channels.size())
    throw ConfigError("decoder_channels",
                      "needs exactly one entry per downsampling encoder stage (" +
                          std::to_string(encoder_channels.size() - 1) + ")");
  if (n_residual_blocks < 0) throw ConfigError("n_residual_blocks", "must be >= 0");
}

void DiscriminatorSpec::validate() const {
  require_positive(in_channels, "in_channels");
  require_positive_list(layer_channels, "layer_channels");
  require_positive(kernel_size, "kernel_size");
  require_positive_list(strides, "strides");
  require_positive(final_stride, "final_stride");
  if (strides.size() != layer_channels.size())
    throw ConfigError("strides", "length " + std::to_string(strides.size()) + " differs from layer_channels length " +
                                     std::to_string(layer_channels.size()));
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
    throw ConfigError("leaky_slope", "must lie in (0, 1)");
}

torch::Tensor instance_norm(const torch::Tensor& x, double eps) {
  auto [var, mean] = torch::var_mean(x, {2, 3}, /*unbiased=*/false, /*keepdim=*/true);
  return (x - mean) * torch::rsqrt(var + eps);
}

int receptive_field(const DiscriminatorSpec& spec) {
  int field = 1;
  int jump = 1;
  for (int stride : spec.strides) {
    field += (spec.kernel_size - 1) * jump;
    jump *= stride;
  }
  field += (spec.kernel_size - 1) * jump;
  return field;
}

std::pair<int64_t, int64_t> discriminator_output_size(const DiscriminatorSpec& spec, int64_t height,
                                                      int64_t width) {
  auto step = [&](int stride, std::size_t layer) {
    height = conv_output(height, spec.kernel_size, stride, kDiscriminatorPadding);
    width = conv_output(width, spec.kernel_size, stride, kDiscriminatorPadding);
    if (height < 1 || width < 1)
      throw ShapeError("input too small: discriminator layer " + std::to_string(layer) +
                       " would produce an empty score map");
  };
  for (std::size_t i = 0; i < spec.strides.size(); ++i) step(spec.strides[i], i);
  step(spec.final_stride, spec.strides.size());
  return {height, width};
}

ResidualBlockImpl::ResidualBlockImpl(int channels, NormKind norm) : norm_(norm) {
  conv1_ = register_module("conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, channels, 3)));
  conv2_ = register_module("conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, channels, 3)));
}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(maybe_norm(conv1_->forward(reflect_pad(x, 1)), norm_));
  h = maybe_norm(conv2_->forward(reflect_pad(h, 1)), norm_);
  return x + h;
}

GeneratorImpl::GeneratorImpl(GeneratorSpec spec) : spec_(std::move(spec)) {
  using torch::nn::Conv2dOptions;
  using torch::nn::ConvTranspose2dOptions;
  const auto& enc = spec_.encoder_channels;
  stem_ = register_module("stem", torch::nn::Conv2d(Conv2dOptions(spec_.in_channels, enc.front(), 7)));
  for (std::size_t i = 1; i < enc.size(); ++i)
    down_->push_back(torch::nn::Conv2d(Conv2dOptions(enc[i - 1], enc[i], 3).stride(2).padding(1)));
  for (int i = 0; i < spec_.n_residual_blocks; ++i)
    residual_->push_back(ResidualBlock(enc.back(), spec_.norm_kind));
  int width = enc.back();
  for (int c : spec_.decoder_channels) {
    up_->push_back(torch::nn::ConvTranspose2d(
        ConvTranspose2dOptions(width, c, 3).stride(2).padding(1).output_padding(1)));
    width = c;
  }
  head_ = register_module("head", torch::nn::Conv2d(Conv2dOptions(width, spec_.out_channels, 7)));
  register_module("down", down_);
  register_module("residual", residual_);
  register_module("up", up_);
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(maybe_norm(stem_->forward(reflect_pad(x, 3)), spec_.norm_kind));
  for (const auto& m : *down_)
    h = torch::relu(maybe_norm(m->as<torch::nn::Conv2d>()->forward(h), spec_.norm_kind));
  for (const auto& m : *residual_) h = m->as<ResidualBlock>()->forward(h);
  for (const auto& m : *up_)
    h = torch::relu(maybe_norm(m->as<torch::nn::ConvTranspose2d>()->forward(h), spec_.norm_kind));
  return torch::tanh(head_->forward(reflect_pad(h, 3)));
}

DiscriminatorImpl::DiscriminatorImpl(DiscriminatorSpec spec) : spec_(std::move(spec)) {
  using torch::nn::Conv2dOptions;
  int width = spec_.in_channels;
  for (std::size_t i = 0; i < spec_.layer_channels.size(); ++i) {
    body_->push_back(torch::nn::Conv2d(Conv2dOptions(width, spec_.layer_channels[i], spec_.kernel_size)
                                           .stride(spec_.strides[i])
                                           .padding(kDiscriminatorPadding)));
    width = spec_.layer_channels[i];
  }
  head_ = register_module("head", torch::nn::Conv2d(Conv2dOptions(width, 1, spec_.kernel_size)
                                                        .stride(spec_.final_stride)
                                                        .padding(kDiscriminatorPadding)));
  register_module("body", body_);
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& x) {
  auto h = x;
  std::size_t i = 0;
  for (const auto& m : *body_) {
    h = m->as<torch::nn::Conv2d>()->forward(h);
    // The first layer sees raw pixels and is left unnormalized.
    if (i++ > 0) h = maybe_norm(h, spec_.norm_kind);
    h = torch::leaky_relu(h, spec_.leaky_slope);
  }
  return head_->forward(h);
}

torch::Tensor NetworkHandle::forward(const torch::Tensor& batch) const {
  if (batch.dim() != 4)
    throw ShapeError("expected an (N, C, H, W) batch, got shape " + shape_string(batch.sizes()));
  const int64_t channels = batch.size(1);
  const int64_t height = batch.size(2);
  const int64_t width = batch.size(3);
  if (const auto* g = std::get_if<GeneratorSpec>(&spec_)) {
    if (channels != g->in_channels)
      throw ShapeError("expected " + std::to_string(g->in_channels) + " input channels, got " +
                       std::to_string(channels) + " (shape " + shape_string(batch.sizes()) + ")");
    const int64_t factor = int64_t{1} << g->downsampling_stages();
    if (height % factor != 0 || width % factor != 0)
      throw ShapeError("generator input height and width must be divisible by " + std::to_string(factor) +
                       ", got " + std::to_string(height) + "x" + std::to_string(width));
    const int64_t bottleneck = std::min(height, width) / factor;
    if (std::min(height, width) < 4 || (g->n_residual_blocks > 0 && bottleneck < 2))
      throw ShapeError("generator input " + std::to_string(height) + "x" + std::to_string(width) +
                       " is too small for reflection padding");
    return module_->as<GeneratorImpl>()->forward(batch);
  }
  const auto& d = std::get<DiscriminatorSpec>(spec_);
  if (channels != d.in_channels)
    throw ShapeError("expected " + std::to_string(d.in_channels) + " input channels, got " +
                     std::to_string(channels) + " (shape " + shape_string(batch.sizes()) + ")");
  discriminator_output_size(d, height, width);
  return module_->as<DiscriminatorImpl>()->forward(batch);
}

std::vector<torch::Tensor> NetworkHandle::parameters() const { return module_->parameters(); }

std::vector<std::pair<std::string, torch::Tensor>> NetworkHandle::named_parameters() const {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  for (const auto& item : module_->named_parameters()) out.emplace_back(item.key(), item.value());
  return out;
}

int64_t NetworkHandle::parameter_count() const {
  int64_t total = 0;
  for (const auto& p : module_->parameters()) total += p.numel();
  return total;
}

void NetworkHandle::set_requires_grad(bool enabled) const {
  for (auto& p : module_->parameters()) p.set_requires_grad(enabled);
}

void NetworkHandle::to(torch::Dtype dtype) const { module_->to(dtype); }

NetworkHandle NetworkHandle::clone() const {
  NetworkHandle copy = std::visit(
      [&](const auto& s) -> NetworkHandle {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, GeneratorSpec>)
          return build_generator(s, 0, role_);
        else
          return build_discriminator(s, 0, role_);
      },
      spec_);
  torch::NoGradGuard no_grad;
  auto src = parameters();
  auto dst = copy.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i].set_data(src[i].detach().clone());
  }
  return copy;
}

NetworkHandle build_generator(const GeneratorSpec& spec, uint64_t seed, NetworkRole role) {
  spec.validate();
  if (role != NetworkRole::GeneratorXY && role != NetworkRole::GeneratorYX)
    throw ArgumentError("build_generator: role must be a generator role");
  auto module = std::make_shared<GeneratorImpl>(spec);
  initialize(*module, seed);
  return NetworkHandle(role, spec, module);
}

NetworkHandle build_discriminator(const DiscriminatorSpec& spec, uint64_t seed, NetworkRole role) {
  spec.validate();
  if (role != NetworkRole::DiscriminatorX && role != NetworkRole::DiscriminatorY)
    throw ArgumentError("build_discriminator: role must be a discriminator role");
  auto module = std::make_shared<DiscriminatorImpl>(spec);
  initialize(*module, seed);
  return NetworkHandle(role, spec, module);
}

}  // namespace cyclegan
