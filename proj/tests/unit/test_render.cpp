#include <gtest/gtest.h>
#include <opencv2/core.hpp>

#include "strokegestalt/error.hpp"
#include "strokegestalt/image_ops.hpp"
#include "strokegestalt/render.hpp"

namespace sg = strokegestalt;

TEST(Render, ProducesCanvasSizedRgb) {
  const auto style = sg::sample_style(1);
  const auto img = sg::render_text_image("hello", style, {128, 32}, 1);
  EXPECT_EQ(img.cols, 128);
  EXPECT_EQ(img.rows, 32);
  EXPECT_EQ(img.type(), CV_32FC3);
}

TEST(Render, DeterministicPerSeed) {
  const auto a = sg::render_text_image("abc12", sg::sample_style(5), {128, 32}, 5);
  const auto b = sg::render_text_image("abc12", sg::sample_style(5), {128, 32}, 5);
  EXPECT_EQ(cv::norm(a, b, cv::NORM_INF), 0.0);
}

TEST(Render, StylesAreLegible) {
  for (uint64_t s = 0; s < 200; ++s) {
    const auto st = sg::sample_style(s);
    auto luma = [](const cv::Vec3d& c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; };
    EXPECT_GE(std::abs(luma(st.foreground) - luma(st.background)), 0.4 - 1e-12);
    EXPECT_GE(st.font, 0);
    EXPECT_LT(st.font, sg::render_font_count());
  }
}

TEST(Render, TextInkDiffersFromBackground) {
  const auto st = sg::sample_style(2);
  const auto img = sg::render_text_image("word", st, {128, 32}, 2);
  const auto gray = sg::to_gray(img);
  double lo, hi;
  cv::minMaxLoc(gray, &lo, &hi);
  EXPECT_GT(hi - lo, 0.3);
}

TEST(Render, TooLongTextThrows) {
  EXPECT_THROW(sg::render_text_image(std::string(80, 'w'), sg::sample_style(0), {128, 32}, 0), sg::ShapeError);
}
