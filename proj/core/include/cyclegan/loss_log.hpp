#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "cyclegan/losses.hpp"

namespace cyclegan {

inline constexpr std::array<std::string_view, 9> kLossColumns = {
    "epoch",          "iteration",       "g_xy_adv",  "g_yx_adv",  "cycle_forward",
    "cycle_backward", "total_generator", "d_x_total", "d_y_total"};

inline constexpr const char* kLossCsvName = "losses.csv";

std::string loss_csv_header();
std::string format_loss_row(const LossReport& report);

/// Appends rows to a losses.csv, writing the header when the file is new or empty.
class LossCsvWriter {
 public:
  explicit LossCsvWriter(const std::filesystem::path& path);
  void write(const LossReport& report);

 private:
  std::ofstream out_;
};

/// Throws FormatError naming the 1-based line of the first malformed row.
std::vector<LossReport> read_loss_csv(std::istream& in);
std::vector<LossReport> read_loss_csv(const std::filesystem::path& path);

/// Drops rows whose iteration is >= `iteration`, keeping the header. Used when resuming a
/// run whose log ran ahead of its last checkpoint.
void truncate_loss_csv(const std::filesystem::path& path, int64_t iteration);

/// Column means of all rows sharing an epoch, in epoch order. `iteration` holds the row count.
std::vector<LossReport> epoch_means(const std::vector<LossReport>& rows);

void write_epoch_means_csv(const std::filesystem::path& path, const std::vector<LossReport>& means);

}  // namespace cyclegan
