#pragma once

#include <cstdint>
#include <vector>

#include <opencv2/core.hpp>
#include <torch/types.h>

namespace strokegestalt {

/// True when STROKEGESTALT_DETERMINISTIC=1 is set in the environment.
bool deterministic_mode_requested();

/// Applies thread and determinism settings for the process. Safe to call
/// repeatedly; `force_deterministic` overrides the environment.
void configure_runtime(bool force_deterministic = false);

/// Seeds torch's global generator.
void seed_torch(uint64_t seed);

/// HWC float Mat in [0,1] -> CHW float32 tensor.
torch::Tensor image_to_tensor(const cv::Mat& img);
/// Stacks equally sized images into an NCHW batch.
torch::Tensor images_to_batch(const std::vector<cv::Mat>& imgs);
/// CHW (or 1xCHW) tensor -> HWC float32 Mat.
cv::Mat tensor_to_image(const torch::Tensor& t);

/// Differentiable RGB -> luma with weights (0.299, 0.587, 0.114).
/// Single-channel input is returned as is.
torch::Tensor to_gray(const torch::Tensor& nchw);

}  // namespace strokegestalt
