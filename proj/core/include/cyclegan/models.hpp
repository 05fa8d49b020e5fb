#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <torch/torch.h>

namespace cyclegan {

enum class NormKind { Instance, None };

std::string_view to_string(NormKind kind);
NormKind norm_kind_from_string(std::string_view text);

/// Encoder / residual trunk / decoder translation network.
///
/// The first encoder entry is a 7x7 stride-1 stem; every further encoder entry is a
/// 3x3 stride-2 downsampler and every decoder entry a 3x3 stride-2 upsampler, so the
/// decoder must have one entry fewer than the encoder for the network to preserve size.
struct GeneratorSpec {
  int in_channels = 3;
  std::vector<int> encoder_channels{64, 128, 256};
  int n_residual_blocks = 6;
  std::vector<int> decoder_channels{128, 64};
  int out_channels = 3;
  NormKind norm_kind = NormKind::Instance;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Number of stride-2 stages; inputs must be divisible by 2^downsampling_stages().
  int downsampling_stages() const { return static_cast<int>(encoder_channels.size()) - 1; }

  bool operator==(const GeneratorSpec&) const = default;
};

/// Patch discriminator: strided conv + LeakyReLU stack, then a final conv to one channel.
struct DiscriminatorSpec {
  int in_channels = 3;
  std::vector<int> layer_channels{32, 64, 128, 256};
  int kernel_size = 4;
  std::vector<int> strides{2, 2, 2, 1};
  int final_stride = 1;
  double leaky_slope = 0.2;
  NormKind norm_kind = NormKind::Instance;

  void validate() const;

  bool operator==(const DiscriminatorSpec&) const = default;
};

/// Every convolution uses padding 1.
inline constexpr int kDiscriminatorPadding = 1;
inline constexpr double kInstanceNormEpsilon = 1e-5;
inline constexpr double kInitStd = 0.02;

enum class NetworkRole { GeneratorXY, GeneratorYX, DiscriminatorX, DiscriminatorY };

std::string_view to_string(NetworkRole role);

/// Per-sample, per-channel normalization over the spatial axes of an (N, C, H, W) batch,
/// without affine parameters.
torch::Tensor instance_norm(const torch::Tensor& x, double eps = kInstanceNormEpsilon);

/// 1 + sum_i (k_i - 1) * prod_{j<i} s_j over all layers including the final one.
int receptive_field(const DiscriminatorSpec& spec);

/// Spatial size of the score map for an input of height x width; throws ShapeError when
/// some layer would produce an empty map.
std::pair<int64_t, int64_t> discriminator_output_size(const DiscriminatorSpec& spec, int64_t height,
                                                      int64_t width);

class ResidualBlockImpl : public torch::nn::Module {
 public:
  ResidualBlockImpl(int channels, NormKind norm);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  NormKind norm_;
  torch::nn::Conv2d conv1_{nullptr};
  torch::nn::Conv2d conv2_{nullptr};
};
TORCH_MODULE(ResidualBlock);

class GeneratorImpl : public torch::nn::Module {
 public:
  explicit GeneratorImpl(GeneratorSpec spec);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  GeneratorSpec spec_;
  torch::nn::Conv2d stem_{nullptr};
  torch::nn::ModuleList down_;
  torch::nn::ModuleList residual_;
  torch::nn::ModuleList up_;
  torch::nn::Conv2d head_{nullptr};
};
TORCH_MODULE(Generator);

class DiscriminatorImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorImpl(DiscriminatorSpec spec);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  DiscriminatorSpec spec_;
  torch::nn::ModuleList body_;
  torch::nn::Conv2d head_{nullptr};
};
TORCH_MODULE(Discriminator);

using NetworkSpec = std::variant<GeneratorSpec, DiscriminatorSpec>;

/// One of the four networks: its role, the spec it was built from, and its parameters.
///
/// Copies share parameters (like torch module holders). Use clone() for a deep copy.
class NetworkHandle {
 public:
  NetworkRole role() const noexcept { return role_; }
  const NetworkSpec& spec() const noexcept { return spec_; }
  bool is_generator() const noexcept { return std::holds_alternative<GeneratorSpec>(spec_); }

  /// Checks channel count and spatial size against the spec, then runs the network.
  torch::Tensor forward(const torch::Tensor& batch) const;

  std::vector<torch::Tensor> parameters() const;
  std::vector<std::pair<std::string, torch::Tensor>> named_parameters() const;
  int64_t parameter_count() const;

  void set_requires_grad(bool enabled) const;
  void to(torch::Dtype dtype) const;
  NetworkHandle clone() const;

  torch::nn::Module& module() const { return *module_; }

 private:
  friend NetworkHandle build_generator(const GeneratorSpec&, uint64_t, NetworkRole);
  friend NetworkHandle build_discriminator(const DiscriminatorSpec&, uint64_t, NetworkRole);

  NetworkHandle(NetworkRole role, NetworkSpec spec, std::shared_ptr<torch::nn::Module> module)
      : role_(role), spec_(std::move(spec)), module_(std::move(module)) {}

  NetworkRole role_;
  NetworkSpec spec_;
  std::shared_ptr<torch::nn::Module> module_;
};

/// Weights ~ N(0, 0.02) drawn from a generator seeded with `seed`; biases zero.
NetworkHandle build_generator(const GeneratorSpec& spec, uint64_t seed,
                              NetworkRole role = NetworkRole::GeneratorXY);
NetworkHandle build_discriminator(const DiscriminatorSpec& spec, uint64_t seed,
                                  NetworkRole role = NetworkRole::DiscriminatorY);

}  // namespace cyclegan
