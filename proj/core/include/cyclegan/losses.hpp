#pragma once

#include <cstdint>
#include <string_view>

#include <torch/torch.h>

namespace cyclegan {

/// lsgan: squared error against target scores 1 (real) / 0 (fake).
/// vanilla: sigmoid cross-entropy on raw scores, i.e. the log form of the minimax game.
enum class GanMode { Lsgan, Vanilla };

std::string_view to_string(GanMode mode);
GanMode gan_mode_from_string(std::string_view text);

/// Scale applied to the discriminator's real+fake sum.
inline constexpr double kDiscriminatorLossScale = 0.5;

/// One row of the loss log. Adversarial and cycle terms are per-image means.
struct LossReport {
  double g_xy_adv = 0.0;
  double g_yx_adv = 0.0;
  double cycle_forward = 0.0;
  double cycle_backward = 0.0;
  double total_generator = 0.0;
  double d_x_total = 0.0;
  double d_y_total = 0.0;
  int64_t epoch = 0;
  int64_t iteration = 0;

  bool operator==(const LossReport&) const = default;
};

/// Generator side of the adversarial game, evaluated on D(G(x)).
/// lsgan: mean((s - 1)^2). vanilla: mean(-log sigmoid(s)).
torch::Tensor adversarial_generator_loss(const torch::Tensor& scores_on_fake, GanMode mode);

/// lsgan: 0.5 * (mean((real - 1)^2) + mean(fake^2)).
/// vanilla: 0.5 * (mean(-log sigmoid(real)) + mean(-log(1 - sigmoid(fake)))).
torch::Tensor adversarial_discriminator_loss(const torch::Tensor& scores_on_real,
                                             const torch::Tensor& scores_on_fake, GanMode mode);

/// Mean absolute difference; symmetric in its arguments.
torch::Tensor cycle_loss(const torch::Tensor& original, const torch::Tensor& reconstructed);

struct ObjectiveTerms {
  double g_xy_adv = 0.0;
  double g_yx_adv = 0.0;
  double cycle_forward = 0.0;
  double cycle_backward = 0.0;
};

/// g_xy_adv + g_yx_adv + lambda_cyc * (cycle_forward + cycle_backward).
/// Throws ConfigError for negative lambda_cyc.
double full_objective(const ObjectiveTerms& terms, double lambda_cyc);

/// Tensor form of full_objective used for backpropagation.
torch::Tensor full_objective(const torch::Tensor& g_xy_adv, const torch::Tensor& g_yx_adv,
                             const torch::Tensor& cycle_forward, const torch::Tensor& cycle_backward,
                             double lambda_cyc);

}  // namespace cyclegan
