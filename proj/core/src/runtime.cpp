#include "strokegestalt/runtime.hpp"

#include <cstdlib>
#include <cstring>

#include <ATen/Context.h>
#include <opencv2/core/utility.hpp>
#include <torch/torch.h>

#include "strokegestalt/error.hpp"

namespace strokegestalt {

bool deterministic_mode_requested() {
  const char* v = std::getenv("STROKEGESTALT_DETERMINISTIC");
  return v != nullptr && std::strcmp(v, "1") == 0;
}

void configure_runtime(bool force_deterministic) {
  if (force_deterministic || deterministic_mode_requested()) {
    torch::set_num_threads(1);
    at::globalContext().setDeterministicAlgorithms(true, /*warn_only=*/false);
    cv::setNumThreads(0);
  }
}

void seed_torch(uint64_t seed) { torch::manual_seed(seed); }

torch::Tensor image_to_tensor(const cv::Mat& img) {
  if (img.empty()) throw ShapeError("image_to_tensor: empty image");
  cv::Mat f;
  img.convertTo(f, CV_32FC(img.channels()));
  if (!f.isContinuous()) f = f.clone();
  auto t = torch::from_blob(f.data, {f.rows, f.cols, f.channels()}, torch::kFloat32).clone();
  return t.permute({2, 0, 1}).contiguous();
}

torch::Tensor images_to_batch(const std::vector<cv::Mat>& imgs) {
  std::vector<torch::Tensor> ts;
  ts.reserve(imgs.size());
  for (const auto& m : imgs) ts.push_back(image_to_tensor(m));
  return torch::stack(ts);
}

cv::Mat tensor_to_image(const torch::Tensor& t) {
  auto x = t.detach().to(torch::kCPU, torch::kFloat32);
  if (x.dim() == 4) {
    if (x.size(0) != 1) throw ShapeError("tensor_to_image: batch must have size 1");
    x = x[0];
  }
  if (x.dim() != 3) throw ShapeError("tensor_to_image: expected CHW tensor");
  x = x.permute({1, 2, 0}).contiguous();
  cv::Mat m(static_cast<int>(x.size(0)), static_cast<int>(x.size(1)), CV_32FC(static_cast<int>(x.size(2))));
  std::memcpy(m.data, x.data_ptr<float>(), sizeof(float) * x.numel());
  return m;
}

torch::Tensor to_gray(const torch::Tensor& nchw) {
  if (nchw.dim() != 4) throw ShapeError("to_gray: expected NCHW tensor");
  if (nchw.size(1) == 1) return nchw;
  if (nchw.size(1) != 3) throw ShapeError("to_gray: expected 1 or 3 channels");
  auto w = torch::tensor({0.299, 0.587, 0.114}, nchw.options()).view({1, 3, 1, 1});
  return (nchw * w).sum(1, /*keepdim=*/true);
}

}  // namespace strokegestalt
