#include "cyclegan/commands.hpp"

#include <chrono>
#include <cstdio>

#include "cyclegan/checkpoint.hpp"
#include "cyclegan/config_io.hpp"
#include "cyclegan/data.hpp"
#include "cyclegan/errors.hpp"
#include "cyclegan/loss_log.hpp"
#include "cyclegan/plot.hpp"
#include "cyclegan/trainer.hpp"

namespace cyclegan {

namespace fs = std::filesystem;

namespace {

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    fn();
    return static_cast<int>(ExitCode::Ok);
  } catch (const std::exception& e) {
    std::string message = e.what();
    if (auto nl = message.find('\n'); nl != std::string::npos) message.resize(nl);
    err << "error: " << message << std::endl;
    return static_cast<int>(exit_code_for(e));
  }
}

std::string epoch_checkpoint_name(int64_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "epoch_%04lld.ckpt", static_cast<long long>(epoch));
  return buf;
}

}  // namespace

ExitCode exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ParseError*>(&error) || dynamic_cast<const ConfigError*>(&error)) return ExitCode::Config;
  if (dynamic_cast<const DatasetError*>(&error)) return ExitCode::Dataset;
  if (dynamic_cast<const TrainingError*>(&error) || dynamic_cast<const RangeError*>(&error))
    return ExitCode::Training;
  if (dynamic_cast<const CheckpointError*>(&error)) return ExitCode::Checkpoint;
  if (dynamic_cast<const FormatError*>(&error) || dynamic_cast<const fs::filesystem_error*>(&error))
    return ExitCode::Io;
  if (dynamic_cast<const ShapeError*>(&error) || dynamic_cast<const ArgumentError*>(&error)) return ExitCode::Shape;
  return ExitCode::Internal;
}

Direction direction_from_string(std::string_view text) {
  if (text == "a2b") return Direction::AToB;
  if (text == "b2a") return Direction::BToA;
  if (text == "cycle") return Direction::Cycle;
  throw ArgumentError("direction must be a2b, b2a or cycle; got '" + std::string(text) + "'");
}

std::vector<std::string> translate_output_names(const fs::path& input, Direction direction) {
  const std::string stem = input.stem().string();
  const std::string ext = input.extension().string();
  if (direction == Direction::Cycle) return {stem + "_real" + ext, stem + "_fake" + ext, stem + "_rec" + ext};
  return {stem + "_fake" + ext};
}

int cmd_train(const TrainCommand& cmd, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunSettings settings = parse_run_settings_file(cmd.config_path, cmd.overrides);
    if (!settings.dataset_root) throw ParseError("dataset_root", -1, "required for training");
    const auto dataset = load_dataset(*settings.dataset_root, Split::Train, settings.train.image_size);
    log << "dataset " << settings.dataset_root->string() << ": " << dataset.domain_a.size() << " A / "
        << dataset.domain_b.size() << " B images" << std::endl;

    const fs::path out = settings.output_dir;
    const fs::path ckpt_dir = out / kCheckpointDirName;
    const fs::path latest = ckpt_dir / kLatestCheckpointName;
    const fs::path csv = out / kLossCsvName;
    fs::create_directories(ckpt_dir);
    write_effective_config(settings, out);

    std::optional<Trainer> trainer;
    if (cmd.resume && fs::exists(latest)) {
      const auto state = load_checkpoint(latest, settings.train);
      trainer.emplace(state);
      truncate_loss_csv(csv, state.iteration);
      log << "resuming from " << latest.string() << " at epoch " << state.epoch << std::endl;
    } else {
      if (cmd.resume) log << "no checkpoint at " << latest.string() << "; starting fresh" << std::endl;
      fs::remove(csv);
      trainer.emplace(settings.train);
    }

    LossCsvWriter writer(csv);
    const auto started = std::chrono::steady_clock::now();
    TrainHooks hooks;
    hooks.max_epochs = cmd.max_epochs;
    hooks.on_report = [&](const LossReport& r) { writer.write(r); };
    hooks.on_checkpoint = [&](const CheckpointState& s) {
      save_checkpoint(s, ckpt_dir / epoch_checkpoint_name(s.epoch));
      save_checkpoint(s, latest);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      log << "epoch " << s.epoch << "/" << settings.train.schedule.total_epochs << " done (" << s.iteration
          << " iterations, " << secs << " s)" << std::endl;
    };
    const auto final_state = trainer->train(dataset, hooks);
    if (final_state.epoch >= settings.train.schedule.total_epochs) save_checkpoint(final_state, out / kFinalCheckpointName);
    log << "wrote " << csv.string() << std::endl;
  });
}

int cmd_translate(const TranslateCommand& cmd, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const auto state = load_checkpoint(cmd.checkpoint);
    const auto inputs = list_images(cmd.input_dir);
    if (inputs.empty()) throw DatasetError("no images in " + cmd.input_dir.string());

    const auto g_xy = restore_network(state, NetworkRole::GeneratorXY);
    const auto f_yx = restore_network(state, NetworkRole::GeneratorYX);
    const int size = state.config.image_size;
    fs::create_directories(cmd.output_dir);

    torch::NoGradGuard no_grad;
    for (const auto& path : inputs) {
      const auto real = to_tensor(read_image(path), size).unsqueeze(0);
      const auto names = translate_output_names(path, cmd.direction);
      switch (cmd.direction) {
        case Direction::AToB:
          write_image(cmd.output_dir / names[0], from_tensor(g_xy.forward(real)));
          break;
        case Direction::BToA:
          write_image(cmd.output_dir / names[0], from_tensor(f_yx.forward(real)));
          break;
        case Direction::Cycle: {
          const auto fake = g_xy.forward(real);
          const auto rec = f_yx.forward(fake);
          write_image(cmd.output_dir / names[0], from_tensor(real));
          write_image(cmd.output_dir / names[1], from_tensor(fake));
          write_image(cmd.output_dir / names[2], from_tensor(rec));
          break;
        }
      }
    }
    log << "translated " << inputs.size() << " image(s) into " << cmd.output_dir.string() << std::endl;
  });
}

int cmd_plot_losses(const PlotLossesCommand& cmd, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const auto rows = read_loss_csv(cmd.csv);
    if (rows.empty()) throw FormatError(cmd.csv.string() + " has no data rows");
    write_loss_plots(rows, cmd.out_dir);
    log << "plotted " << rows.size() << " rows into " << cmd.out_dir.string() << std::endl;
  });
}

}  // namespace cyclegan
