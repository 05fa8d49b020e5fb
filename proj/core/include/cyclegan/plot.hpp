#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "cyclegan/losses.hpp"

namespace cyclegan {

struct PlotSeries {
  std::string label;
  std::vector<double> values;
  cv::Scalar color;  // BGR
};

/// Renders line series against their index into a PNG.
void plot_series(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                 const std::vector<PlotSeries>& series);

inline constexpr const char* kCyclePlotName = "cycle_losses.png";
inline constexpr const char* kAdversarialPlotName = "gan_losses.png";
inline constexpr const char* kEpochMeansName = "epoch_means.csv";

/// Writes the two loss figures (cycle terms; generator and discriminator terms) per iteration
/// and the per-epoch mean table into `out_dir`.
void write_loss_plots(const std::vector<LossReport>& rows, const std::filesystem::path& out_dir);

}  // namespace cyclegan
