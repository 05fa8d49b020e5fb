#include "cyclegan/trainer.hpp"

#include <cmath>
#include <sstream>

#include "cyclegan/errors.hpp"

namespace cyclegan {

namespace {

enum SeedStream : uint64_t { kSeedGxy = 1, kSeedFyx, kSeedDx, kSeedDy, kSeedBufferX, kSeedBufferY, kSeedEpochs };

const NetworkRole kRoles[] = {NetworkRole::GeneratorXY, NetworkRole::GeneratorYX, NetworkRole::DiscriminatorX,
                              NetworkRole::DiscriminatorY};

torch::optim::AdamOptions adam_options(const OptimizerConfig& c) {
  return torch::optim::AdamOptions(c.learning_rate).betas({c.beta1, c.beta2}).eps(c.epsilon);
}

double checked(const torch::Tensor& loss, const char* component) {
  const double value = loss.item<double>();
  if (!std::isfinite(value)) throw TrainingError(component, "non-finite loss (" + std::to_string(value) + ")");
  return value;
}

std::string save_optimizer(const torch::optim::Adam& opt) {
  torch::serialize::OutputArchive archive;
  opt.save(archive);
  std::ostringstream out;
  archive.save_to(out);
  return out.str();
}

void load_optimizer(torch::optim::Adam& opt, const std::string& bytes) {
  torch::serialize::InputArchive archive;
  std::istringstream in(bytes);
  archive.load_from(in);
  opt.load(archive);
}

/// Disables parameter gradients for the lifetime of the guard.
class FreezeGuard {
 public:
  explicit FreezeGuard(std::initializer_list<const NetworkHandle*> nets) : nets_(nets) {
    for (const auto* n : nets_) n->set_requires_grad(false);
  }
  ~FreezeGuard() {
    for (const auto* n : nets_) n->set_requires_grad(true);
  }
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  std::vector<const NetworkHandle*> nets_;
};

const NetworkHandle& by_role(const Networks& nets, NetworkRole role) {
  switch (role) {
    case NetworkRole::GeneratorXY: return nets.g_xy;
    case NetworkRole::GeneratorYX: return nets.f_yx;
    case NetworkRole::DiscriminatorX: return nets.d_x;
    case NetworkRole::DiscriminatorY: return nets.d_y;
  }
  throw ArgumentError("unknown network role");
}

void load_parameters(const NetworkHandle& net, const CheckpointState& state) {
  torch::NoGradGuard no_grad;
  const std::string prefix = std::string(to_string(net.role())) + "/";
  for (auto& [name, param] : net.named_parameters()) {
    auto it = state.parameters.find(prefix + name);
    if (it == state.parameters.end())
      throw CheckpointError(CheckpointError::Kind::Corrupt, "checkpoint lacks parameter " + prefix + name);
    if (!it->second.sizes().equals(param.sizes()))
      throw CheckpointError(CheckpointError::Kind::Corrupt, "parameter " + prefix + name + " has the wrong shape");
    param.copy_(it->second);
  }
}

}  // namespace

uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Networks Networks::build(const TrainConfig& config) {
  return Networks{
      build_generator(config.generator, derive_seed(config.seed, kSeedGxy), NetworkRole::GeneratorXY),
      build_generator(config.generator, derive_seed(config.seed, kSeedFyx), NetworkRole::GeneratorYX),
      build_discriminator(config.discriminator, derive_seed(config.seed, kSeedDx), NetworkRole::DiscriminatorX),
      build_discriminator(config.discriminator, derive_seed(config.seed, kSeedDy), NetworkRole::DiscriminatorY),
  };
}

Trainer::Trainer(TrainConfig config)
    : config_((config.validate(), std::move(config))),
      nets_(Networks::build(config_)),
      buffer_x_(config_.buffer_capacity, derive_seed(config_.seed, kSeedBufferX)),
      buffer_y_(config_.buffer_capacity, derive_seed(config_.seed, kSeedBufferY)),
      rng_(derive_seed(config_.seed, kSeedEpochs)) {
  make_optimizers();
}

Trainer::Trainer(const CheckpointState& state) : Trainer(state.config) {
  for (auto role : kRoles) load_parameters(by_role(nets_, role), state);
  auto restore_opt = [&](torch::optim::Adam& opt, NetworkRole role) {
    auto it = state.optimizer_states.find(std::string(to_string(role)));
    if (it == state.optimizer_states.end())
      throw CheckpointError(CheckpointError::Kind::Corrupt,
                            "checkpoint lacks optimizer state for " + std::string(to_string(role)));
    try {
      load_optimizer(opt, it->second);
    } catch (const c10::Error& e) {
      throw CheckpointError(CheckpointError::Kind::Corrupt, std::string("unreadable optimizer state: ") + e.what_without_backtrace());
    }
  };
  restore_opt(*opt_g_xy_, NetworkRole::GeneratorXY);
  restore_opt(*opt_f_yx_, NetworkRole::GeneratorYX);
  restore_opt(*opt_d_x_, NetworkRole::DiscriminatorX);
  restore_opt(*opt_d_y_, NetworkRole::DiscriminatorY);
  buffer_x_ = ReplayBuffer::restore(state.buffer_x);
  buffer_y_ = ReplayBuffer::restore(state.buffer_y);
  std::istringstream rng_in(state.rng_state);
  rng_in >> rng_;
  if (rng_in.fail()) throw CheckpointError(CheckpointError::Kind::Corrupt, "malformed rng state");
  epoch_ = state.epoch;
  iteration_ = state.iteration;
}

void Trainer::make_optimizers() {
  const auto options = adam_options(config_.optimizer);
  opt_g_xy_ = std::make_unique<torch::optim::Adam>(nets_.g_xy.parameters(), options);
  opt_f_yx_ = std::make_unique<torch::optim::Adam>(nets_.f_yx.parameters(), options);
  opt_d_x_ = std::make_unique<torch::optim::Adam>(nets_.d_x.parameters(), options);
  opt_d_y_ = std::make_unique<torch::optim::Adam>(nets_.d_y.parameters(), options);
}

void Trainer::set_learning_rate(double lr) {
  for (auto* opt : {opt_g_xy_.get(), opt_f_yx_.get(), opt_d_x_.get(), opt_d_y_.get()}) {
    for (auto& group : opt->param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
  }
}

double Trainer::learning_rate() const {
  return static_cast<const torch::optim::AdamOptions&>(opt_g_xy_->param_groups().front().options()).lr();
}

GeneratorStepResult Trainer::generator_step(const Sample& sample) {
  const auto x = sample.image_a.unsqueeze(0);
  const auto y = sample.image_b.unsqueeze(0);
  FreezeGuard frozen({&nets_.d_x, &nets_.d_y});

  opt_g_xy_->zero_grad();
  opt_f_yx_->zero_grad();

  auto fake_y = nets_.g_xy.forward(x);
  auto rec_x = nets_.f_yx.forward(fake_y);
  auto fake_x = nets_.f_yx.forward(y);
  auto rec_y = nets_.g_xy.forward(fake_x);

  auto adv_xy = adversarial_generator_loss(nets_.d_y.forward(fake_y), config_.gan_mode);
  auto adv_yx = adversarial_generator_loss(nets_.d_x.forward(fake_x), config_.gan_mode);
  auto cyc_f = cycle_loss(x, rec_x);
  auto cyc_b = cycle_loss(y, rec_y);
  auto total = full_objective(adv_xy, adv_yx, cyc_f, cyc_b, config_.lambda_cyc);

  GeneratorStepResult result;
  auto& r = result.report;
  r.g_xy_adv = checked(adv_xy, "g_xy_adv");
  r.g_yx_adv = checked(adv_yx, "g_yx_adv");
  r.cycle_forward = checked(cyc_f, "cycle_forward");
  r.cycle_backward = checked(cyc_b, "cycle_backward");
  checked(total, "total_generator");
  r.total_generator = full_objective(ObjectiveTerms{r.g_xy_adv, r.g_yx_adv, r.cycle_forward, r.cycle_backward},
                                     config_.lambda_cyc);

  total.backward();
  opt_g_xy_->step();
  opt_f_yx_->step();

  result.fake_x = fake_x.detach();
  result.fake_y = fake_y.detach();
  return result;
}

LossReport Trainer::discriminator_step(const Sample& sample, const torch::Tensor& fake_x,
                                       const torch::Tensor& fake_y) {
  const auto x = sample.image_a.unsqueeze(0);
  const auto y = sample.image_b.unsqueeze(0);
  const auto pooled_x = buffer_x_.query(fake_x);
  const auto pooled_y = buffer_y_.query(fake_y);
  LossReport r;

  opt_d_x_->zero_grad();
  auto loss_x = adversarial_discriminator_loss(nets_.d_x.forward(x), nets_.d_x.forward(pooled_x), config_.gan_mode);
  r.d_x_total = checked(loss_x, "d_x_total");
  loss_x.backward();
  opt_d_x_->step();

  opt_d_y_->zero_grad();
  auto loss_y = adversarial_discriminator_loss(nets_.d_y.forward(y), nets_.d_y.forward(pooled_y), config_.gan_mode);
  r.d_y_total = checked(loss_y, "d_y_total");
  loss_y.backward();
  opt_d_y_->step();
  return r;
}

LossReport Trainer::train_iteration(const Sample& sample) {
  auto g = generator_step(sample);
  const auto d = discriminator_step(sample, g.fake_x, g.fake_y);
  g.report.d_x_total = d.d_x_total;
  g.report.d_y_total = d.d_y_total;
  return g.report;
}

CheckpointState Trainer::train(const UnpairedDataset& dataset, const TrainHooks& hooks) {
  if (dataset.image_size != config_.image_size)
    throw ConfigError("image_size", "dataset was loaded at " + std::to_string(dataset.image_size) +
                                        " but the config trains at " + std::to_string(config_.image_size));
  int epochs_run = 0;
  while (epoch_ < config_.schedule.total_epochs) {
    if (hooks.max_epochs && epochs_run >= *hooks.max_epochs) break;
    set_learning_rate(lr_at(config_.schedule, config_.optimizer.learning_rate, static_cast<int>(epoch_)));
    EpochStream stream(dataset, rng_());
    while (auto sample = stream.next()) {
      auto report = train_iteration(*sample);
      report.epoch = epoch_;
      report.iteration = iteration_;
      ++iteration_;
      if (hooks.on_report) hooks.on_report(report);
    }
    ++epoch_;
    ++epochs_run;
    if ((epoch_ % config_.checkpoint_every == 0 || epoch_ == config_.schedule.total_epochs) && hooks.on_checkpoint)
      hooks.on_checkpoint(state());
  }
  return state();
}

CheckpointState Trainer::state() const {
  CheckpointState s;
  s.config = config_;
  s.config_fingerprint = fingerprint(config_);
  for (auto role : kRoles) {
    const auto& net = by_role(nets_, role);
    const std::string prefix = std::string(to_string(role)) + "/";
    for (const auto& [name, param] : net.named_parameters()) s.parameters[prefix + name] = param.detach().clone();
  }
  s.optimizer_states["g_xy"] = save_optimizer(*opt_g_xy_);
  s.optimizer_states["f_yx"] = save_optimizer(*opt_f_yx_);
  s.optimizer_states["d_x"] = save_optimizer(*opt_d_x_);
  s.optimizer_states["d_y"] = save_optimizer(*opt_d_y_);
  s.buffer_x = buffer_x_.snapshot();
  s.buffer_y = buffer_y_.snapshot();
  std::ostringstream rng_out;
  rng_out << rng_;
  s.rng_state = rng_out.str();
  s.epoch = epoch_;
  s.iteration = iteration_;
  return s;
}

NetworkHandle restore_network(const CheckpointState& state, NetworkRole role) {
  NetworkHandle net = (role == NetworkRole::GeneratorXY || role == NetworkRole::GeneratorYX)
                          ? build_generator(state.config.generator, 0, role)
                          : build_discriminator(state.config.discriminator, 0, role);
  load_parameters(net, state);
  return net;
}

}  // namespace cyclegan
