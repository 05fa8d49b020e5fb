#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <opencv2/core.hpp>
#include <torch/torch.h>

namespace cyclegan {

namespace fs = std::filesystem;

enum class Split { Train, Test };

std::string_view to_string(Split split);

/// Two unaligned image collections read from <root>/<split>A and <root>/<split>B.
struct UnpairedDataset {
  fs::path root;
  Split split = Split::Train;
  std::vector<fs::path> domain_a;
  std::vector<fs::path> domain_b;
  int image_size = 256;

  fs::path folder_a() const;
  fs::path folder_b() const;
};

/// One training step's input: an image from each domain, (3, S, S) in [-1, 1].
struct Sample {
  torch::Tensor image_a;
  torch::Tensor image_b;
  std::size_t index_a = 0;
  std::size_t index_b = 0;
};

struct SampleIndex {
  std::size_t a = 0;
  std::size_t b = 0;

  bool operator==(const SampleIndex&) const = default;
};

/// .jpg, .jpeg or .png, case-insensitive.
bool is_image_file(const fs::path& path);

/// Lexicographically sorted image files directly inside `folder`.
/// Throws DatasetError when the folder does not exist.
std::vector<fs::path> list_images(const fs::path& folder);

/// Throws DatasetError naming the missing or empty folder.
UnpairedDataset load_dataset(const fs::path& root, Split split, int image_size = 256);

/// Decodes a file into an 8-bit, 3-channel raster in RGB order.
cv::Mat read_image(const fs::path& path);
/// Encodes an RGB raster; the format follows the file extension.
void write_image(const fs::path& path, const cv::Mat& rgb);

/// Bilinear resize to image_size x image_size, then x / 127.5 - 1. Returns (3, S, S) float.
torch::Tensor to_tensor(const cv::Mat& rgb, int image_size);

/// Clamps to [-1, 1] and maps x -> round((x + 1) * 127.5). Accepts (3, H, W) or (1, 3, H, W).
cv::Mat from_tensor(const torch::Tensor& image);

/// Pairing for one epoch: max(n_a, n_b) entries. The larger domain is visited once in shuffled
/// order; the smaller one cycles through its own shuffled order.
std::vector<SampleIndex> epoch_plan(std::size_t n_a, std::size_t n_b, uint64_t seed);

Sample load_sample(const UnpairedDataset& dataset, SampleIndex index);

/// Lazily decodes the samples of one epoch in epoch_plan order.
class EpochStream {
 public:
  EpochStream(const UnpairedDataset& dataset, uint64_t seed);

  std::optional<Sample> next();
  std::size_t size() const noexcept { return plan_.size(); }
  const std::vector<SampleIndex>& plan() const noexcept { return plan_; }

 private:
  const UnpairedDataset* dataset_;
  std::vector<SampleIndex> plan_;
  std::size_t cursor_ = 0;
};

inline EpochStream iterate_epoch(const UnpairedDataset& dataset, uint64_t seed) {
  return EpochStream(dataset, seed);
}

}  // namespace cyclegan
