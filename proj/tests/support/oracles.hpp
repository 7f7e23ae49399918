#pragma once

// Slow, direct reference implementations used as test oracles. They are
// written from the textbook definitions and share no code with the library.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <opencv2/core.hpp>
#include <torch/torch.h>

namespace oracle {

inline double pixel(const cv::Mat& m, int y, int x, int c) {
  const int ch = m.channels();
  if (m.depth() == CV_64F) return m.ptr<double>(y)[x * ch + c];
  return m.ptr<float>(y)[x * ch + c];
}

inline double psnr(const cv::Mat& a, const cv::Mat& b) {
  double sse = 0.0;
  long n = 0;
  for (int y = 0; y < a.rows; ++y) {
    for (int x = 0; x < a.cols; ++x) {
      for (int c = 0; c < a.channels(); ++c) {
        const double d = pixel(a, y, x, c) - pixel(b, y, x, c);
        sse += d * d;
        ++n;
      }
    }
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(1.0) - 10.0 * std::log10(sse / static_cast<double>(n));
}

inline std::vector<std::vector<double>> luma(const cv::Mat& m) {
  std::vector<std::vector<double>> out(m.rows, std::vector<double>(m.cols));
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      out[y][x] = m.channels() == 1 ? pixel(m, y, x, 0)
                                    : 0.299 * pixel(m, y, x, 0) + 0.587 * pixel(m, y, x, 1) + 0.114 * pixel(m, y, x, 2);
    }
  }
  return out;
}

/// Sliding-window SSIM over every fully contained 11x11 window, Gaussian
/// weights sigma 1.5, constants (0.01)^2 and (0.03)^2.
inline double ssim(const cv::Mat& a, const cv::Mat& b) {
  const int win = 11;
  const double sigma = 1.5, c1 = 1e-4, c2 = 9e-4;
  double w[win][win];
  double total = 0.0;
  for (int i = 0; i < win; ++i) {
    for (int j = 0; j < win; ++j) {
      const double dy = i - win / 2, dx = j - win / 2;
      w[i][j] = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      total += w[i][j];
    }
  }
  const auto x = luma(a), y = luma(b);
  double acc = 0.0;
  long count = 0;
  for (int r = 0; r + win <= a.rows; ++r) {
    for (int c = 0; c + win <= a.cols; ++c) {
      double mx = 0, my = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          mx += w[i][j] / total * x[r + i][c + j];
          my += w[i][j] / total * y[r + i][c + j];
        }
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double p = w[i][j] / total;
          vx += p * (x[r + i][c + j] - mx) * (x[r + i][c + j] - mx);
          vy += p * (y[r + i][c + j] - my) * (y[r + i][c + j] - my);
          cxy += p * (x[r + i][c + j] - mx) * (y[r + i][c + j] - my);
        }
      acc += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

/// Pixel shuffle by its index law: out[b,c,y,x] = in[b, c*r*r + (y%r)*r + x%r, y/r, x/r].
inline torch::Tensor pixel_shuffle(const torch::Tensor& in, int r) {
  const auto b = in.size(0), c = in.size(1) / (r * r), h = in.size(2), w = in.size(3);
  auto out = torch::empty({b, c, h * r, w * r}, in.options());
  auto src = in.accessor<float, 4>();
  auto dst = out.accessor<float, 4>();
  for (int64_t n = 0; n < b; ++n)
    for (int64_t k = 0; k < c; ++k)
      for (int64_t y = 0; y < h * r; ++y)
        for (int64_t x = 0; x < w * r; ++x) dst[n][k][y][x] = src[n][k * r * r + (y % r) * r + x % r][y / r][x / r];
  return out;
}

/// Mean of |a-b| or (a-b)^2 over all elements, by explicit loop.
inline double mean_diff(const torch::Tensor& a, const torch::Tensor& b, bool l1) {
  auto x = a.to(torch::kDouble).contiguous().flatten();
  auto y = b.to(torch::kDouble).contiguous().flatten();
  const double* px = x.data_ptr<double>();
  const double* py = y.data_ptr<double>();
  double s = 0.0;
  for (int64_t i = 0; i < x.numel(); ++i) {
    const double d = px[i] - py[i];
    s += l1 ? std::abs(d) : d * d;
  }
  return s / static_cast<double>(x.numel());
}

/// Cubic convolution weight, a = -0.5.
inline double cubic(double t) {
  const double a = -0.5;
  t = std::abs(t);
  if (t <= 1) return (a + 2) * t * t * t - (a + 3) * t * t + 1;
  if (t < 2) return a * t * t * t - 5 * a * t * t + 8 * a * t - 4 * a;
  return 0.0;
}

/// Direct 2-D bicubic resampling with half-pixel centres and clamped reads.
inline double bicubic_at(const cv::Mat& src, int oy, int ox, int c, double sy, double sx) {
  const double fy = (oy + 0.5) * sy - 0.5, fx = (ox + 0.5) * sx - 0.5;
  const int iy = static_cast<int>(std::floor(fy)), ix = static_cast<int>(std::floor(fx));
  double v = 0.0;
  for (int m = -1; m <= 2; ++m) {
    for (int n = -1; n <= 2; ++n) {
      const int yy = std::clamp(iy + m, 0, src.rows - 1), xx = std::clamp(ix + n, 0, src.cols - 1);
      v += cubic(fy - (iy + m)) * cubic(fx - (ix + n)) * pixel(src, yy, xx, c);
    }
  }
  return v;
}

struct GradCheck {
  long coordinates = 0;
  long passing = 0;
  double worst = 0.0;
  double fraction() const { return coordinates ? static_cast<double>(passing) / coordinates : 0.0; }
};

/// Central finite differences of `loss` over every element of `params`,
/// compared against the analytic gradients already stored in `.grad()`.
inline GradCheck finite_difference_check(const std::vector<torch::Tensor>& params,
                                         const std::function<double()>& loss, double eps, double tol) {
  GradCheck out;
  torch::NoGradGuard no_grad;
  for (const auto& p : params) {
    auto flat = p.view(-1);
    auto g = p.grad().reshape(-1);
    for (int64_t i = 0; i < flat.numel(); ++i) {
      const double orig = flat[i].item<double>();
      flat[i] = orig + eps;
      const double up = loss();
      flat[i] = orig - eps;
      const double down = loss();
      flat[i] = orig;
      const double numeric = (up - down) / (2 * eps);
      const double analytic = g[i].item<double>();
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-7});
      const double rel = std::abs(numeric - analytic) / denom;
      out.worst = std::max(out.worst, rel);
      ++out.coordinates;
      if (rel <= tol) ++out.passing;
    }
  }
  return out;
}

}  // namespace oracle
