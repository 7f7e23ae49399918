#include "strokegestalt/degrade.hpp"

#include <cmath>
#include <random>

#include <opencv2/imgproc.hpp>

#include "strokegestalt/error.hpp"
#include "strokegestalt/image_ops.hpp"

namespace strokegestalt {

std::string to_string(BlurKind kind) {
  switch (kind) {
    case BlurKind::kGaussian: return "gaussian";
    case BlurKind::kBox: return "box";
    case BlurKind::kMotionHorizontal: return "motion_horizontal";
    case BlurKind::kMotionVertical: return "motion_vertical";
  }
  return "unknown";
}

BlurKind blur_kind_from_string(const std::string& s) {
  for (int k = 0; k < kBlurKindCount; ++k) {
    if (to_string(static_cast<BlurKind>(k)) == s) return static_cast<BlurKind>(k);
  }
  throw Error("unknown blur kind: " + s);
}

void DegradationSpec::validate() const {
  if (min_ops < 1 || max_ops < min_ops) throw Error("degradation: invalid op-count range");
  if (gaussian_sigma_min <= 0 || gaussian_sigma_max < gaussian_sigma_min) {
    throw Error("degradation: invalid gaussian sigma range");
  }
  if (box_sizes.empty()) throw Error("degradation: no box sizes");
  if (motion_min < 2 || motion_max < motion_min) throw Error("degradation: invalid motion range");
  if (factor != 2) throw Error("degradation: only x2 downsampling is supported");
  if (max_shift < 0) throw Error("degradation: negative max_shift");
}

void to_json(nlohmann::json& j, const DegradationSpec& s) {
  j = nlohmann::json{{"n_ops_range", {s.min_ops, s.max_ops}},
                     {"blur_types",
                      {{{"kind", "gaussian"}, {"sigma", {s.gaussian_sigma_min, s.gaussian_sigma_max}}},
                       {{"kind", "box"}, {"sizes", s.box_sizes}},
                       {{"kind", "motion_horizontal"}, {"length", {s.motion_min, s.motion_max}}},
                       {{"kind", "motion_vertical"}, {"length", {s.motion_min, s.motion_max}}}}},
                     {"downsample", {{"method", "bicubic"}, {"a", kBicubicA}, {"factor", s.factor}}},
                     {"max_shift", s.max_shift},
                     {"rng_seed", s.rng_seed}};
}

void from_json(const nlohmann::json& j, DegradationSpec& s) {
  s = DegradationSpec{};
  if (j.contains("n_ops_range")) {
    s.min_ops = j.at("n_ops_range").at(0).get<int>();
    s.max_ops = j.at("n_ops_range").at(1).get<int>();
  }
  if (j.contains("blur_types")) {
    for (const auto& b : j.at("blur_types")) {
      const auto kind = b.at("kind").get<std::string>();
      if (kind == "gaussian") {
        s.gaussian_sigma_min = b.at("sigma").at(0).get<double>();
        s.gaussian_sigma_max = b.at("sigma").at(1).get<double>();
      } else if (kind == "box") {
        s.box_sizes = b.at("sizes").get<std::vector<int>>();
      } else if (kind == "motion_horizontal" || kind == "motion_vertical") {
        s.motion_min = b.at("length").at(0).get<int>();
        s.motion_max = b.at("length").at(1).get<int>();
      }
    }
  }
  if (j.contains("downsample")) s.factor = j.at("downsample").value("factor", 2);
  s.max_shift = j.value("max_shift", 0);
  s.rng_seed = j.value("rng_seed", uint64_t{0});
  s.validate();
}

DegradationPlan sample_degradation(const DegradationSpec& spec, uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  DegradationPlan plan;
  const int n = std::uniform_int_distribution<int>(spec.min_ops, spec.max_ops)(rng);
  std::uniform_int_distribution<int> pick_kind(0, kBlurKindCount - 1);
  for (int i = 0; i < n; ++i) {
    BlurOp op;
    op.kind = static_cast<BlurKind>(pick_kind(rng));
    switch (op.kind) {
      case BlurKind::kGaussian:
        op.sigma = std::uniform_real_distribution<double>(spec.gaussian_sigma_min, spec.gaussian_sigma_max)(rng);
        break;
      case BlurKind::kBox: {
        std::uniform_int_distribution<size_t> pick(0, spec.box_sizes.size() - 1);
        op.length = spec.box_sizes[pick(rng)];
        break;
      }
      case BlurKind::kMotionHorizontal:
      case BlurKind::kMotionVertical:
        op.length = std::uniform_int_distribution<int>(spec.motion_min, spec.motion_max)(rng);
        break;
    }
    plan.ops.push_back(op);
  }
  if (spec.max_shift > 0) {
    std::uniform_int_distribution<int> shift(-spec.max_shift, spec.max_shift);
    plan.shift_x = shift(rng);
    plan.shift_y = shift(rng);
  }
  return plan;
}

cv::Mat apply_blur(const cv::Mat& img, const BlurOp& op) {
  cv::Mat out;
  switch (op.kind) {
    case BlurKind::kGaussian: {
      const int radius = static_cast<int>(std::ceil(3.0 * op.sigma));
      cv::GaussianBlur(img, out, cv::Size(2 * radius + 1, 2 * radius + 1), op.sigma, op.sigma,
                       cv::BORDER_REFLECT101);
      break;
    }
    case BlurKind::kBox:
      cv::blur(img, out, cv::Size(op.length, op.length), cv::Point(-1, -1), cv::BORDER_REFLECT101);
      break;
    case BlurKind::kMotionHorizontal: {
      cv::Mat k = cv::Mat::ones(1, op.length, CV_64F) / op.length;
      cv::filter2D(img, out, -1, k, cv::Point(-1, -1), 0, cv::BORDER_REFLECT101);
      break;
    }
    case BlurKind::kMotionVertical: {
      cv::Mat k = cv::Mat::ones(op.length, 1, CV_64F) / op.length;
      cv::filter2D(img, out, -1, k, cv::Point(-1, -1), 0, cv::BORDER_REFLECT101);
      break;
    }
  }
  clamp01(out);
  return out;
}

cv::Mat apply_degradation(const cv::Mat& hr, const DegradationPlan& plan, const DegradationSpec& spec) {
  if (hr.empty()) throw ShapeError("degrade: empty image");
  if (hr.rows % spec.factor != 0 || hr.cols % spec.factor != 0) {
    throw ShapeError("degrade: image dims " + std::to_string(hr.rows) + "x" + std::to_string(hr.cols) +
                     " not divisible by " + std::to_string(spec.factor));
  }
  cv::Mat img;
  hr.convertTo(img, CV_32FC(hr.channels()));
  for (const auto& op : plan.ops) img = apply_blur(img, op);
  if (plan.shift_x != 0 || plan.shift_y != 0) {
    cv::Mat m = (cv::Mat_<double>(2, 3) << 1, 0, plan.shift_x, 0, 1, plan.shift_y);
    cv::warpAffine(img, img, m, img.size(), cv::INTER_NEAREST, cv::BORDER_REPLICATE);
  }
  cv::Mat lr = bicubic_resize(img, cv::Size(img.cols / spec.factor, img.rows / spec.factor));
  clamp01(lr);
  return lr;
}

cv::Mat degrade(const cv::Mat& hr, const DegradationSpec& spec, uint64_t seed) {
  return apply_degradation(hr, sample_degradation(spec, seed), spec);
}

}  // namespace strokegestalt
