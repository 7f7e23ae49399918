#include "strokegestalt/metrics.hpp"

#include <cmath>

#include <opencv2/imgproc.hpp>

#include "strokegestalt/error.hpp"
#include "strokegestalt/image_ops.hpp"
#include "strokegestalt/text.hpp"

namespace strokegestalt {

namespace {

void check_same(const cv::Mat& a, const cv::Mat& b, const char* what) {
  if (a.size() != b.size() || a.channels() != b.channels()) {
    throw ShapeError(std::string(what) + ": image shapes differ");
  }
}

cv::Mat as_f64(const cv::Mat& m) {
  cv::Mat out;
  m.convertTo(out, CV_MAKETYPE(CV_64F, m.channels()));
  return out;
}

}  // namespace

double psnr(const cv::Mat& a, const cv::Mat& b) {
  check_same(a, b, "psnr");
  const double sq = cv::norm(as_f64(a), as_f64(b), cv::NORM_L2SQR);
  if (sq == 0.0) return kPsnrIdentical;
  const double mse = sq / (static_cast<double>(a.total()) * a.channels());
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const cv::Mat& a, const cv::Mat& b, const SsimOptions& o) {
  check_same(a, b, "ssim");
  if (a.rows < o.window || a.cols < o.window) {
    throw ShapeError("ssim: image " + std::to_string(a.cols) + "x" + std::to_string(a.rows) +
                     " is smaller than the " + std::to_string(o.window) + "x" + std::to_string(o.window) + " window");
  }
  cv::Mat x = as_f64(a.channels() == 1 ? a : to_gray(a));
  cv::Mat y = as_f64(b.channels() == 1 ? b : to_gray(b));
  cv::Mat g = cv::getGaussianKernel(o.window, o.sigma, CV_64F);

  // Filtering then cropping the border keeps exactly the valid windows.
  const int r = o.window / 2;
  const cv::Rect valid(r, r, x.cols - 2 * r, x.rows - 2 * r);
  auto blur = [&](const cv::Mat& m) {
    cv::Mat out;
    cv::sepFilter2D(m, out, CV_64F, g, g, cv::Point(-1, -1), 0, cv::BORDER_REFLECT);
    return cv::Mat(out(valid));
  };
  cv::Mat mx = blur(x), my = blur(y);
  cv::Mat sxx = blur(x.mul(x)) - mx.mul(mx);
  cv::Mat syy = blur(y.mul(y)) - my.mul(my);
  cv::Mat sxy = blur(x.mul(y)) - mx.mul(my);
  cv::Mat num = (2 * mx.mul(my) + o.c1).mul(2 * sxy + o.c2);
  cv::Mat den = (mx.mul(mx) + my.mul(my) + o.c1).mul(sxx + syy + o.c2);
  cv::Mat map;
  cv::divide(num, den, map);
  return cv::mean(map)[0];
}

double recognition_accuracy(const std::vector<std::string>& preds, const std::vector<std::string>& gts) {
  if (preds.size() != gts.size()) throw Error("recognition_accuracy: length mismatch");
  if (preds.empty()) throw Error("recognition_accuracy: no samples");
  size_t hits = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (normalize_text(preds[i]) == normalize_text(gts[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

}  // namespace strokegestalt
