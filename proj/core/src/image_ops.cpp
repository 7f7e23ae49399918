#include "strokegestalt/image_ops.hpp"

#include <array>
#include <cmath>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "strokegestalt/error.hpp"

namespace strokegestalt {

namespace {

double cubic_weight(double x) {
  constexpr double a = kBicubicA;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

struct Taps {
  std::vector<std::array<int, 4>> idx;
  std::vector<std::array<double, 4>> w;
};

Taps make_taps(int src_len, int dst_len) {
  Taps t;
  t.idx.resize(dst_len);
  t.w.resize(dst_len);
  const double scale = static_cast<double>(src_len) / dst_len;
  for (int i = 0; i < dst_len; ++i) {
    const double s = (i + 0.5) * scale - 0.5;
    const int base = static_cast<int>(std::floor(s));
    const double frac = s - base;
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
      const int j = base - 1 + k;
      t.idx[i][k] = std::clamp(j, 0, src_len - 1);
      t.w[i][k] = cubic_weight(frac - (k - 1));
      sum += t.w[i][k];
    }
    for (double& w : t.w[i]) w /= sum;
  }
  return t;
}

}  // namespace

cv::Mat bicubic_resize(const cv::Mat& src, cv::Size dst_size) {
  if (src.empty() || dst_size.width <= 0 || dst_size.height <= 0) {
    throw ShapeError("bicubic_resize: empty source or target");
  }
  cv::Mat in;
  src.convertTo(in, CV_64FC(src.channels()));
  const int ch = in.channels();
  const Taps tx = make_taps(in.cols, dst_size.width);
  const Taps ty = make_taps(in.rows, dst_size.height);

  // Separable pass: rows first, then columns.
  cv::Mat tmp(in.rows, dst_size.width, CV_64FC(ch));
  for (int y = 0; y < in.rows; ++y) {
    const double* s = in.ptr<double>(y);
    double* d = tmp.ptr<double>(y);
    for (int x = 0; x < dst_size.width; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += tx.w[x][k] * s[tx.idx[x][k] * ch + c];
        d[x * ch + c] = acc;
      }
    }
  }
  cv::Mat out(dst_size, CV_64FC(ch));
  for (int y = 0; y < dst_size.height; ++y) {
    double* d = out.ptr<double>(y);
    for (int x = 0; x < dst_size.width * ch; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += ty.w[y][k] * tmp.ptr<double>(ty.idx[y][k])[x];
      d[x] = acc;
    }
  }
  cv::Mat result;
  out.convertTo(result, src.depth() == CV_64F ? CV_64FC(ch) : CV_32FC(ch));
  return result;
}

void clamp01(cv::Mat& img) {
  cv::min(img, 1.0, img);
  cv::max(img, 0.0, img);
}

cv::Mat to_gray(const cv::Mat& img) {
  if (img.channels() == 1) return img.clone();
  if (img.channels() != 3) throw ShapeError("to_gray: expected 1 or 3 channels");
  cv::Mat out;
  cv::transform(img, out, cv::Matx13d(0.299, 0.587, 0.114));
  return out;
}

cv::Mat read_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw DataError("cannot read image: " + path.string());
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  cv::Mat out;
  rgb.convertTo(out, CV_32FC3, 1.0 / 255.0);
  return out;
}

void write_image(const std::filesystem::path& path, const cv::Mat& img) {
  cv::Mat u8;
  img.convertTo(u8, CV_8UC(img.channels()), 255.0);
  if (img.channels() == 3) cv::cvtColor(u8, u8, cv::COLOR_RGB2BGR);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), u8)) throw DataError("cannot write image: " + path.string());
}

cv::Mat quantize8(const cv::Mat& img) {
  cv::Mat u8, out;
  img.convertTo(u8, CV_8UC(img.channels()), 255.0);
  u8.convertTo(out, CV_32FC(img.channels()), 1.0 / 255.0);
  return out;
}

}  // namespace strokegestalt
