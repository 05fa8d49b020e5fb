#include "cyclegan/loss_log.hpp"

#include <charconv>
#include <cstring>
#include <cstdio>
#include <map>
#include <sstream>

#include "cyclegan/errors.hpp"

namespace cyclegan {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_field(std::string_view text, std::size_t line_no, std::string_view column) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw FormatError("losses csv line " + std::to_string(line_no) + ": bad value '" + std::string(text) +
                      "' in column " + std::string(column));
  return value;
}

}  // namespace

std::string loss_csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kLossColumns.size(); ++i) {
    if (i) out += ',';
    out += kLossColumns[i];
  }
  return out;
}

std::string format_loss_row(const LossReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%lld,%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", static_cast<long long>(r.epoch),
                static_cast<long long>(r.iteration), r.g_xy_adv, r.g_yx_adv, r.cycle_forward, r.cycle_backward,
                r.total_generator, r.d_x_total, r.d_y_total);
  return buf;
}

LossCsvWriter::LossCsvWriter(const std::filesystem::path& path) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app);
  if (!out_) throw FormatError("cannot open " + path.string() + " for writing");
  if (fresh) out_ << loss_csv_header() << '\n' << std::flush;
}

void LossCsvWriter::write(const LossReport& report) { out_ << format_loss_row(report) << '\n' << std::flush; }

std::vector<LossReport> read_loss_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw FormatError("losses csv line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != loss_csv_header())
    throw FormatError("losses csv line 1: header does not match the expected columns " + loss_csv_header());
  std::vector<LossReport> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != kLossColumns.size())
      throw FormatError("losses csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(kLossColumns.size()) + " fields, got " + std::to_string(fields.size()));
    LossReport r;
    r.epoch = parse_field<int64_t>(fields[0], line_no, kLossColumns[0]);
    r.iteration = parse_field<int64_t>(fields[1], line_no, kLossColumns[1]);
    double* values[] = {&r.g_xy_adv,        &r.g_yx_adv,  &r.cycle_forward, &r.cycle_backward,
                        &r.total_generator, &r.d_x_total, &r.d_y_total};
    for (std::size_t i = 0; i < 7; ++i) *values[i] = parse_field<double>(fields[i + 2], line_no, kLossColumns[i + 2]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<LossReport> read_loss_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_loss_csv(in);
}

void truncate_loss_csv(const std::filesystem::path& path, int64_t iteration) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return;
  auto rows = read_loss_csv(path);
  std::ofstream out(path, std::ios::trunc);
  out << loss_csv_header() << '\n';
  for (const auto& r : rows) {
    if (r.iteration < iteration) out << format_loss_row(r) << '\n';
  }
}

std::vector<LossReport> epoch_means(const std::vector<LossReport>& rows) {
  std::map<int64_t, std::pair<LossReport, int64_t>> acc;
  for (const auto& r : rows) {
    auto& [sum, count] = acc[r.epoch];
    sum.g_xy_adv += r.g_xy_adv;
    sum.g_yx_adv += r.g_yx_adv;
    sum.cycle_forward += r.cycle_forward;
    sum.cycle_backward += r.cycle_backward;
    sum.total_generator += r.total_generator;
    sum.d_x_total += r.d_x_total;
    sum.d_y_total += r.d_y_total;
    ++count;
  }
  std::vector<LossReport> out;
  for (auto& [epoch, entry] : acc) {
    auto [m, count] = entry;
    const double n = static_cast<double>(count);
    m.g_xy_adv /= n;
    m.g_yx_adv /= n;
    m.cycle_forward /= n;
    m.cycle_backward /= n;
    m.total_generator /= n;
    m.d_x_total /= n;
    m.d_y_total /= n;
    m.epoch = epoch;
    m.iteration = count;
    out.push_back(m);
  }
  return out;
}

void write_epoch_means_csv(const std::filesystem::path& path, const std::vector<LossReport>& means) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "epoch,rows";
  for (std::size_t i = 2; i < kLossColumns.size(); ++i) out << ',' << kLossColumns[i];
  out << '\n';
  for (const auto& m : means) out << format_loss_row(m) << '\n';
}

}  // namespace cyclegan
