#include "cyclegan/data.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <numeric>
#include <random>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "cyclegan/errors.hpp"

namespace cyclegan {

namespace {

std::vector<std::size_t> shuffled(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

std::string_view to_string(Split split) { return split == Split::Train ? "train" : "test"; }

fs::path UnpairedDataset::folder_a() const { return root / (std::string(to_string(split)) + "A"); }
fs::path UnpairedDataset::folder_b() const { return root / (std::string(to_string(split)) + "B"); }

bool is_image_file(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

std::vector<fs::path> list_images(const fs::path& folder) {
  std::error_code ec;
  if (!fs::is_directory(folder, ec)) throw DatasetError("missing image folder: " + folder.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(folder)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

UnpairedDataset load_dataset(const fs::path& root, Split split, int image_size) {
  if (image_size <= 0) throw ConfigError("image_size", "must be positive");
  UnpairedDataset ds;
  ds.root = root;
  ds.split = split;
  ds.image_size = image_size;
  ds.domain_a = list_images(ds.folder_a());
  ds.domain_b = list_images(ds.folder_b());
  if (ds.domain_a.empty()) throw DatasetError("no images in " + ds.folder_a().string());
  if (ds.domain_b.empty()) throw DatasetError("no images in " + ds.folder_b().string());
  return ds;
}

cv::Mat read_image(const fs::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw FormatError("cannot decode image " + path.string());
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return rgb;
}

void write_image(const fs::path& path, const cv::Mat& rgb) {
  if (rgb.type() != CV_8UC3) throw FormatError("write_image expects an 8-bit 3-channel raster");
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw FormatError("cannot encode " + path.string() + ": " + e.what());
  }
  if (!ok) throw FormatError("cannot write image " + path.string());
}

torch::Tensor to_tensor(const cv::Mat& rgb, int image_size) {
  if (rgb.channels() != 3 || rgb.depth() != CV_8U)
    throw FormatError("expected an 8-bit 3-channel raster, got " + std::to_string(rgb.channels()) + " channel(s)");
  if (image_size <= 0) throw ConfigError("image_size", "must be positive");
  cv::Mat sized;
  if (rgb.rows == image_size && rgb.cols == image_size) {
    sized = rgb.isContinuous() ? rgb : rgb.clone();
  } else {
    cv::resize(rgb, sized, cv::Size(image_size, image_size), 0, 0, cv::INTER_LINEAR);
  }
  auto hwc = torch::from_blob(sized.data, {sized.rows, sized.cols, 3}, torch::kUInt8);
  return hwc.permute({2, 0, 1}).to(torch::kFloat32).div(127.5).sub(1.0).contiguous();
}

cv::Mat from_tensor(const torch::Tensor& image) {
  auto img = image.detach();
  if (img.dim() == 4 && img.size(0) == 1) img = img[0];
  if (img.dim() != 3 || img.size(0) != 3) throw FormatError("from_tensor expects a (3, H, W) image");
  auto pixels = img.to(torch::kFloat32)
                    .clamp(-1.0, 1.0)
                    .add(1.0)
                    .mul(127.5)
                    .round()
                    .to(torch::kUInt8)
                    .permute({1, 2, 0})
                    .contiguous();
  cv::Mat out(static_cast<int>(pixels.size(0)), static_cast<int>(pixels.size(1)), CV_8UC3);
  std::memcpy(out.data, pixels.data_ptr<uint8_t>(), static_cast<std::size_t>(pixels.numel()));
  return out;
}

std::vector<SampleIndex> epoch_plan(std::size_t n_a, std::size_t n_b, uint64_t seed) {
  if (n_a == 0 || n_b == 0) throw DatasetError("epoch_plan: both domains must be non-empty");
  std::mt19937_64 rng(seed);
  auto order_a = shuffled(n_a, rng);
  auto order_b = shuffled(n_b, rng);
  const std::size_t length = std::max(n_a, n_b);
  std::vector<SampleIndex> plan(length);
  for (std::size_t i = 0; i < length; ++i) plan[i] = {order_a[i % n_a], order_b[i % n_b]};
  return plan;
}

Sample load_sample(const UnpairedDataset& dataset, SampleIndex index) {
  Sample s;
  s.index_a = index.a;
  s.index_b = index.b;
  s.image_a = to_tensor(read_image(dataset.domain_a.at(index.a)), dataset.image_size);
  s.image_b = to_tensor(read_image(dataset.domain_b.at(index.b)), dataset.image_size);
  return s;
}

EpochStream::EpochStream(const UnpairedDataset& dataset, uint64_t seed)
    : dataset_(&dataset), plan_(epoch_plan(dataset.domain_a.size(), dataset.domain_b.size(), seed)) {}

std::optional<Sample> EpochStream::next() {
  if (cursor_ >= plan_.size()) return std::nullopt;
  return load_sample(*dataset_, plan_[cursor_++]);
}

}  // namespace cyclegan
