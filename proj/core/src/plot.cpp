#include "cyclegan/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "cyclegan/errors.hpp"
#include "cyclegan/loss_log.hpp"

namespace cyclegan {

namespace {

constexpr int kWidth = 960;
constexpr int kHeight = 540;
constexpr int kLeft = 80;
constexpr int kRight = 24;
constexpr int kTop = 48;
constexpr int kBottom = 60;

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

void plot_series(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                 const std::vector<PlotSeries>& series) {
  cv::Mat canvas(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
  const int plot_w = kWidth - kLeft - kRight;
  const int plot_h = kHeight - kTop - kBottom;

  std::size_t n = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double x_span = n > 1 ? static_cast<double>(n - 1) : 1.0;

  auto to_px = [&](std::size_t i, double v) {
    const int x = kLeft + static_cast<int>(std::lround(plot_w * (static_cast<double>(i) / x_span)));
    const int y = kTop + static_cast<int>(std::lround(plot_h * (1.0 - (v - lo) / (hi - lo))));
    return cv::Point(x, y);
  };

  const cv::Scalar axis(40, 40, 40);
  const cv::Scalar grid(225, 225, 225);
  for (int t = 0; t <= 5; ++t) {
    const double v = lo + (hi - lo) * t / 5.0;
    const int y = kTop + static_cast<int>(std::lround(plot_h * (1.0 - t / 5.0)));
    cv::line(canvas, {kLeft, y}, {kLeft + plot_w, y}, grid, 1);
    cv::putText(canvas, tick_label(v), {8, y + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.4, axis, 1, cv::LINE_AA);
  }
  for (int t = 0; t <= 5; ++t) {
    const double i = x_span * t / 5.0;
    const int x = kLeft + static_cast<int>(std::lround(plot_w * t / 5.0));
    cv::putText(canvas, tick_label(std::round(i)), {x - 10, kTop + plot_h + 18}, cv::FONT_HERSHEY_SIMPLEX, 0.4, axis, 1,
                cv::LINE_AA);
  }
  cv::rectangle(canvas, {kLeft, kTop}, {kLeft + plot_w, kTop + plot_h}, axis, 1);
  cv::putText(canvas, title, {kLeft, 30}, cv::FONT_HERSHEY_SIMPLEX, 0.6, axis, 1, cv::LINE_AA);
  cv::putText(canvas, x_label, {kLeft + plot_w / 2 - 30, kHeight - 16}, cv::FONT_HERSHEY_SIMPLEX, 0.5, axis, 1,
              cv::LINE_AA);

  int legend_y = kTop + 18;
  for (const auto& s : series) {
    std::vector<cv::Point> pts;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (std::isfinite(s.values[i])) pts.push_back(to_px(i, s.values[i]));
    }
    if (pts.size() == 1) cv::circle(canvas, pts.front(), 3, s.color, cv::FILLED, cv::LINE_AA);
    if (pts.size() > 1) cv::polylines(canvas, pts, false, s.color, 1, cv::LINE_AA);
    cv::line(canvas, {kLeft + plot_w - 170, legend_y - 4}, {kLeft + plot_w - 145, legend_y - 4}, s.color, 2);
    cv::putText(canvas, s.label, {kLeft + plot_w - 138, legend_y}, cv::FONT_HERSHEY_SIMPLEX, 0.45, axis, 1,
                cv::LINE_AA);
    legend_y += 18;
  }

  if (!cv::imwrite(path.string(), canvas)) throw FormatError("cannot write plot " + path.string());
}

void write_loss_plots(const std::vector<LossReport>& rows, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto column = [&](double LossReport::*field) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.*field);
    return v;
  };
  plot_series(out_dir / kCyclePlotName, "Cycle-consistency losses", "iteration",
              {{"cycle_forward", column(&LossReport::cycle_forward), {200, 90, 30}},
               {"cycle_backward", column(&LossReport::cycle_backward), {30, 120, 220}}});
  plot_series(out_dir / kAdversarialPlotName, "Generator and discriminator losses", "iteration",
              {{"g_xy_adv", column(&LossReport::g_xy_adv), {200, 90, 30}},
               {"g_yx_adv", column(&LossReport::g_yx_adv), {30, 120, 220}},
               {"d_x_total", column(&LossReport::d_x_total), {60, 160, 60}},
               {"d_y_total", column(&LossReport::d_y_total), {150, 60, 160}}});
  write_epoch_means_csv(out_dir / kEpochMeansName, epoch_means(rows));
}

}  // namespace cyclegan
