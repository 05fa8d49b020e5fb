#include "cyclegan/losses.hpp"

#include <string>

#include "cyclegan/errors.hpp"

namespace cyclegan {

namespace {

void require_scores(const torch::Tensor& scores, const char* what) {
  if (!scores.defined() || scores.numel() == 0) throw ArgumentError(std::string(what) + ": empty score map");
}

void require_lambda(double lambda_cyc) {
  if (!(lambda_cyc >= 0.0)) throw ConfigError("lambda_cyc", "must be >= 0, got " + std::to_string(lambda_cyc));
}

}  // namespace

std::string_view to_string(GanMode mode) { return mode == GanMode::Lsgan ? "lsgan" : "vanilla"; }

GanMode gan_mode_from_string(std::string_view text) {
  if (text == "lsgan") return GanMode::Lsgan;
  if (text == "vanilla") return GanMode::Vanilla;
  throw ConfigError("gan_mode", "expected 'lsgan' or 'vanilla', got '" + std::string(text) + "'");
}

torch::Tensor adversarial_generator_loss(const torch::Tensor& scores_on_fake, GanMode mode) {
  require_scores(scores_on_fake, "adversarial_generator_loss");
  if (mode == GanMode::Lsgan) return (scores_on_fake - 1.0).square().mean();
  // -log sigmoid(s) == softplus(-s), stable for large |s|.
  return torch::softplus(-scores_on_fake).mean();
}

torch::Tensor adversarial_discriminator_loss(const torch::Tensor& scores_on_real,
                                             const torch::Tensor& scores_on_fake, GanMode mode) {
  require_scores(scores_on_real, "adversarial_discriminator_loss (real)");
  require_scores(scores_on_fake, "adversarial_discriminator_loss (fake)");
  torch::Tensor real_term;
  torch::Tensor fake_term;
  if (mode == GanMode::Lsgan) {
    real_term = (scores_on_real - 1.0).square().mean();
    fake_term = scores_on_fake.square().mean();
  } else {
    real_term = torch::softplus(-scores_on_real).mean();
    fake_term = torch::softplus(scores_on_fake).mean();
  }
  return kDiscriminatorLossScale * (real_term + fake_term);
}

torch::Tensor cycle_loss(const torch::Tensor& original, const torch::Tensor& reconstructed) {
  if (!original.sizes().equals(reconstructed.sizes())) {
    std::ostringstream msg;
    msg << "cycle_loss: shape mismatch " << original.sizes() << " vs " << reconstructed.sizes();
    throw ShapeError(msg.str());
  }
  if (original.numel() == 0) throw ArgumentError("cycle_loss: empty images");
  return (original - reconstructed).abs().mean();
}

double full_objective(const ObjectiveTerms& terms, double lambda_cyc) {
  require_lambda(lambda_cyc);
  return terms.g_xy_adv + terms.g_yx_adv + lambda_cyc * (terms.cycle_forward + terms.cycle_backward);
}

torch::Tensor full_objective(const torch::Tensor& g_xy_adv, const torch::Tensor& g_yx_adv,
                             const torch::Tensor& cycle_forward, const torch::Tensor& cycle_backward,
                             double lambda_cyc) {
  require_lambda(lambda_cyc);
  return g_xy_adv + g_yx_adv + lambda_cyc * (cycle_forward + cycle_backward);
}

}  // namespace cyclegan
