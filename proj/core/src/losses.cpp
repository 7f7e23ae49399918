#include "strokegestalt/losses.hpp"

#include <torch/torch.h>

#include "strokegestalt/error.hpp"

namespace strokegestalt {

std::string to_string(Norm n) { return n == Norm::kL1 ? "l1" : "l2"; }

Norm norm_from_string(const std::string& s) {
  if (s == "l1" || s == "L1") return Norm::kL1;
  if (s == "l2" || s == "L2") return Norm::kL2;
  throw Error("unknown norm: " + s);
}

namespace {

torch::Tensor elementwise(const torch::Tensor& diff, Norm norm) {
  return norm == Norm::kL1 ? diff.abs() : diff.square();
}

std::string shape_str(const torch::Tensor& t) {
  std::string s = "[";
  for (int64_t i = 0; i < t.dim(); ++i) s += (i ? "," : "") + std::to_string(t.size(i));
  return s + "]";
}

}  // namespace

torch::Tensor psm_loss(const torch::Tensor& sr, const torch::Tensor& hr, Norm norm) {
  if (sr.sizes() != hr.sizes()) {
    throw ShapeError("psm_loss: shape mismatch " + shape_str(sr) + " vs " + shape_str(hr));
  }
  return elementwise(sr - hr, norm).mean();
}

torch::Tensor sfm_loss(const torch::Tensor& attn_sr, const torch::Tensor& attn_hr, Norm norm,
                       const torch::Tensor& step_mask) {
  if (attn_sr.sizes() != attn_hr.sizes()) {
    throw ShapeError("sfm_loss: attention sequences differ " + shape_str(attn_sr) + " vs " + shape_str(attn_hr) +
                     " (label alignment bug?)");
  }
  if (attn_sr.dim() != 4) throw ShapeError("sfm_loss: expected [B,T,h,w] attention");
  auto per = elementwise(attn_sr - attn_hr, norm);
  if (!step_mask.defined()) return per.mean();
  if (step_mask.dim() != 2 || step_mask.size(0) != per.size(0) || step_mask.size(1) != per.size(1)) {
    throw ShapeError("sfm_loss: step mask " + shape_str(step_mask) + " does not match " + shape_str(per));
  }
  auto m = step_mask.to(per.dtype());
  const auto positions = per.size(2) * per.size(3);
  auto count = m.sum() * static_cast<double>(positions);
  auto summed = (per.sum({2, 3}) * m).sum();
  return torch::where(count > 0, summed / count.clamp_min(1.0), torch::zeros_like(summed));
}

torch::Tensor total_loss(const torch::Tensor& psm, const torch::Tensor& sfm, double lambda_sfm) {
  if (lambda_sfm < 0) throw Error("total_loss: lambda_sfm must be non-negative");
  if (lambda_sfm == 0.0) return psm;
  return psm + lambda_sfm * sfm;
}

}  // namespace strokegestalt
