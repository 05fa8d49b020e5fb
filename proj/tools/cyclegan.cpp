#include <iostream>

#include <CLI11.hpp>

#include "cyclegan/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Unpaired image-to-image translation with cycle-consistent GANs"};
  app.require_subcommand(1);

  cyclegan::TrainCommand train;
  int max_epochs = 0;
  auto* train_cmd = app.add_subcommand("train", "Train G, F, D_X and D_Y on an unpaired dataset");
  train_cmd->add_option("--config", train.config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
  train_cmd->add_flag("--resume", train.resume, "Continue from <output_dir>/checkpoints/latest.ckpt");
  train_cmd->add_option("--set", train.overrides, "Override a config key, e.g. --set optimizer.learning_rate=1e-4")
      ->take_all()
      ->allow_extra_args(false);
  train_cmd->add_option("--max-epochs", max_epochs, "Stop after this many epochs in this invocation")
      ->check(CLI::PositiveNumber);

  cyclegan::TranslateCommand translate;
  std::string direction = "a2b";
  auto* translate_cmd = app.add_subcommand("translate", "Translate a folder of images with a trained checkpoint");
  translate_cmd->add_option("--checkpoint", translate.checkpoint, "Checkpoint file")->required();
  translate_cmd->add_option("--input", translate.input_dir, "Folder of input images")->required();
  translate_cmd->add_option("--direction", direction, "a2b, b2a or cycle")
      ->check(CLI::IsMember({"a2b", "b2a", "cycle"}));
  translate_cmd->add_option("--output", translate.output_dir, "Output folder")->required();

  cyclegan::PlotLossesCommand plot;
  auto* plot_cmd = app.add_subcommand("plot-losses", "Plot a losses.csv and write per-epoch means");
  plot_cmd->add_option("--csv", plot.csv, "losses.csv written by train")->required();
  plot_cmd->add_option("--out", plot.out_dir, "Output folder")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(cyclegan::ExitCode::Usage);
  }

  if (*train_cmd) {
    if (max_epochs > 0) train.max_epochs = max_epochs;
    return cyclegan::cmd_train(train, std::cout, std::cerr);
  }
  if (*translate_cmd) {
    translate.direction = cyclegan::direction_from_string(direction);
    return cyclegan::cmd_translate(translate, std::cout, std::cerr);
  }
  return cyclegan::cmd_plot_losses(plot, std::cout, std::cerr);
}
