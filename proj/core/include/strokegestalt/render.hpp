#pragma once

#include <cstdint>
#include <string_view>

#include <opencv2/core.hpp>

namespace strokegestalt {

/// Appearance of one rendered word. Colours are RGB in [0, 1].
struct RenderStyle {
  int font = 0;             // index into the built-in vector font list
  bool italic = false;
  double stroke_weight = 1.0;  // thickness multiplier at supersampled scale
  cv::Vec3d foreground{0.0, 0.0, 0.0};
  cv::Vec3d background{1.0, 1.0, 1.0};
  double min_scale = 0.35;  // font height relative to canvas height
  double max_scale = 0.75;
  double jitter = 0.08;     // max offset as a fraction of free space
};

int render_font_count();

/// Random but legible style (luma contrast >= 0.4). Deterministic in seed.
RenderStyle sample_style(uint64_t seed);

/// Renders `text` centred (with seeded jitter) on an RGB float canvas.
/// Glyphs are drawn at 4x supersampling and area-downsampled.
/// Throws ShapeError if the text cannot fit at style.min_scale.
cv::Mat render_text_image(std::string_view text, const RenderStyle& style, cv::Size canvas,
                          uint64_t seed);

}  // namespace strokegestalt
