#include "strokegestalt/render.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>

#include <opencv2/imgproc.hpp>

#include "strokegestalt/error.hpp"

namespace strokegestalt {

namespace {

constexpr int kSupersample = 4;

constexpr std::array<int, 4> kFonts = {
    cv::FONT_HERSHEY_SIMPLEX,
    cv::FONT_HERSHEY_DUPLEX,
    cv::FONT_HERSHEY_COMPLEX,
    cv::FONT_HERSHEY_TRIPLEX,
};

double luma(const cv::Vec3d& c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }

}  // namespace

int render_font_count() { return static_cast<int>(kFonts.size()); }

RenderStyle sample_style(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RenderStyle style;
  style.font = std::uniform_int_distribution<int>(0, render_font_count() - 1)(rng);
  style.italic = unit(rng) < 0.2;
  style.stroke_weight = 0.8 + 0.6 * unit(rng);
  // Redraw until the pair is legible; bounded in practice by a few draws.
  for (int attempt = 0; attempt < 64; ++attempt) {
    cv::Vec3d fg(unit(rng), unit(rng), unit(rng));
    cv::Vec3d bg(unit(rng), unit(rng), unit(rng));
    if (std::abs(luma(fg) - luma(bg)) >= 0.4) {
      style.foreground = fg;
      style.background = bg;
      return style;
    }
  }
  style.foreground = {0.05, 0.05, 0.05};
  style.background = {0.95, 0.95, 0.95};
  return style;
}

cv::Mat render_text_image(std::string_view text, const RenderStyle& style, cv::Size canvas,
                          uint64_t seed) {
  if (text.empty()) throw ShapeError("render_text_image: empty text");
  if (canvas.width <= 0 || canvas.height <= 0) throw ShapeError("render_text_image: empty canvas");
  if (style.font < 0 || style.font >= render_font_count()) throw Error("render_text_image: bad font index");

  const std::string str(text);
  const int face = kFonts[style.font] | (style.italic ? cv::FONT_ITALIC : 0);
  const cv::Size big(canvas.width * kSupersample, canvas.height * kSupersample);

  int base = 0;
  const cv::Size unit = cv::getTextSize(str, face, 1.0, 1, &base);
  const double unit_h = unit.height + base;
  const double margin = 0.06 * big.width;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit_dist(0.0, 1.0);
  const double want_h = (style.min_scale + (style.max_scale - style.min_scale) * unit_dist(rng)) * big.height;
  double scale = want_h / unit_h;
  const double fit_w = (big.width - 2.0 * margin) / unit.width;
  const double min_scale = style.min_scale * big.height / unit_h;
  if (fit_w < min_scale) {
    throw ShapeError("render_text_image: '" + str + "' is wider than the " + std::to_string(canvas.width) +
                     "x" + std::to_string(canvas.height) + " canvas at minimum font size");
  }
  scale = std::min(scale, fit_w);
  const int thickness = std::max(1, static_cast<int>(std::lround(style.stroke_weight * 2.0 * scale)));
  const cv::Size sz = cv::getTextSize(str, face, scale, thickness, &base);

  const double free_x = std::max(0.0, big.width - sz.width - 2.0 * margin);
  const double free_y = std::max(0.0, static_cast<double>(big.height - sz.height - base));
  const double jx = (unit_dist(rng) * 2.0 - 1.0) * style.jitter * free_x;
  const double jy = (unit_dist(rng) * 2.0 - 1.0) * style.jitter * free_y;
  const int x = static_cast<int>(std::lround((big.width - sz.width) / 2.0 + jx));
  const int y = static_cast<int>(std::lround((big.height + sz.height - base) / 2.0 + jy));

  cv::Mat img(big, CV_32FC3, cv::Scalar(style.background[0], style.background[1], style.background[2]));
  cv::putText(img, str, cv::Point(x, y), face, scale,
              cv::Scalar(style.foreground[0], style.foreground[1], style.foreground[2]), thickness,
              cv::LINE_AA);
  cv::Mat out;
  cv::resize(img, out, canvas, 0, 0, cv::INTER_AREA);
  cv::min(out, 1.0, out);
  cv::max(out, 0.0, out);
  return out;
}

}  // namespace strokegestalt
