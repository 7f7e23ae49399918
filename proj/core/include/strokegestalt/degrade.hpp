#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>

namespace strokegestalt {

enum class BlurKind { kGaussian, kBox, kMotionHorizontal, kMotionVertical };

inline constexpr int kBlurKindCount = 4;

std::string to_string(BlurKind kind);
BlurKind blur_kind_from_string(const std::string& s);

/// One concrete blur application.
struct BlurOp {
  BlurKind kind = BlurKind::kGaussian;
  double sigma = 0.0;  // gaussian only
  int length = 0;      // box kernel size or motion length
};

/// Parameters of the blur-then-downsample procedure used to turn a clean HR
/// rendering into its LR counterpart.
struct DegradationSpec {
  int min_ops = 1;
  int max_ops = 5;
  double gaussian_sigma_min = 0.8;
  double gaussian_sigma_max = 2.0;
  std::vector<int> box_sizes{3, 5};
  int motion_min = 3;
  int motion_max = 7;
  int factor = 2;
  /// Maximum |dx|, |dy| of the optional LR-vs-HR misalignment; 0 disables it.
  int max_shift = 0;
  uint64_t rng_seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const DegradationSpec& s);
void from_json(const nlohmann::json& j, DegradationSpec& s);

struct DegradationPlan {
  std::vector<BlurOp> ops;
  int shift_x = 0;
  int shift_y = 0;
};

/// Draws n uniformly from [min_ops, max_ops], then n independent blur kinds
/// and their parameters. Deterministic in `seed`.
DegradationPlan sample_degradation(const DegradationSpec& spec, uint64_t seed);

cv::Mat apply_blur(const cv::Mat& img, const BlurOp& op);

/// Executes a plan: blurs (clamping after each), optional shift, then bicubic
/// downsampling by spec.factor.
cv::Mat apply_degradation(const cv::Mat& hr, const DegradationPlan& plan, const DegradationSpec& spec);

/// sample_degradation + apply_degradation. Throws ShapeError on odd dims.
cv::Mat degrade(const cv::Mat& hr, const DegradationSpec& spec, uint64_t seed);

}  // namespace strokegestalt
