#pragma once

#include <string>

#include <torch/types.h>

namespace strokegestalt {

enum class Norm { kL1, kL2 };

std::string to_string(Norm n);
Norm norm_from_string(const std::string& s);

/// Mean squared (L2) or absolute (L1) pixel difference. Throws ShapeError on
/// mismatched shapes.
torch::Tensor psm_loss(const torch::Tensor& sr, const torch::Tensor& hr, Norm norm);

/// Mean absolute (L1) or squared (L2) difference between attention map
/// sequences [B, T, h, w]. `step_mask` [B, T] (optional) selects which steps
/// count; the mean is over selected steps times map positions, and an
/// all-zero mask yields 0.
torch::Tensor sfm_loss(const torch::Tensor& attn_sr, const torch::Tensor& attn_hr, Norm norm,
                       const torch::Tensor& step_mask = {});

/// psm + lambda * sfm.
torch::Tensor total_loss(const torch::Tensor& psm, const torch::Tensor& sfm, double lambda_sfm);

}  // namespace strokegestalt
