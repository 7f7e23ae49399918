#pragma once

#include <limits>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace strokegestalt {

/// Returned by psnr() for identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// 10 log10(1 / MSE) with peak 1, MSE over every channel. Images are float
/// in [0,1]. Throws ShapeError on mismatched shapes.
double psnr(const cv::Mat& a, const cv::Mat& b);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
};

/// Mean SSIM over all fully contained windows of the luma images (RGB input
/// is converted first). Throws ShapeError on mismatched shapes or when the
/// image is smaller than the window.
double ssim(const cv::Mat& a, const cv::Mat& b, const SsimOptions& options = {});

/// Fraction of predictions equal to their ground truth after normalize_text.
/// Throws Error on empty input or length mismatch.
double recognition_accuracy(const std::vector<std::string>& preds, const std::vector<std::string>& gts);

}  // namespace strokegestalt
