#pragma once

#include <filesystem>

#include <opencv2/core.hpp>

namespace strokegestalt {

/// Catmull-Rom coefficient of the cubic convolution kernel.
inline constexpr double kBicubicA = -0.5;

/// Cubic convolution resize with a = -0.5 and half-pixel centre alignment.
/// Works on any float Mat (CV_32F/CV_64F, 1..4 channels); borders replicate.
/// No anti-aliasing widening is applied when shrinking.
cv::Mat bicubic_resize(const cv::Mat& src, cv::Size dst_size);

/// Clamps a float image to [0, 1] in place.
void clamp01(cv::Mat& img);

/// Luma with weights (0.299, 0.587, 0.114); input assumed RGB channel order.
cv::Mat to_gray(const cv::Mat& img);

/// Reads an 8-bit raster as RGB float32 in [0, 1].
cv::Mat read_image(const std::filesystem::path& path);
/// Writes an RGB float image in [0, 1] as an 8-bit lossless PNG.
void write_image(const std::filesystem::path& path, const cv::Mat& img);

/// Rounds a [0,1] float image through 8-bit quantization (what disk storage does).
cv::Mat quantize8(const cv::Mat& img);

}  // namespace strokegestalt
