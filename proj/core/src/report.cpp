#include "strokegestalt/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "strokegestalt/error.hpp"

namespace fs = std::filesystem;

namespace strokegestalt {

std::vector<TrainLogRow> read_train_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open training log " + path.string());
  std::vector<TrainLogRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(nlohmann::json::parse(line).get<TrainLogRow>());
  }
  return rows;
}

RunSummary read_run(const fs::path& dir) {
  RunSummary run;
  run.dir = dir;
  std::ifstream cfg(dir / "config.json");
  if (!cfg) throw Error("run directory " + dir.string() + " has no config.json");
  const auto snapshot = nlohmann::json::parse(cfg);
  run.config = snapshot.at("train").get<TrainConfig>();
  run.log = read_train_log(dir / "train_log.jsonl");
  std::ostringstream label;
  label << "lambda=" << run.config.lambda_sfm << " " << to_string(run.config.psm_norm) << "/"
        << to_string(run.config.sfm_norm);
  if (run.config.attention_filter != AttentionFilter::kAll) label << " " << to_string(run.config.attention_filter);
  label << " s" << run.config.seed;
  run.label = label.str();
  if (fs::exists(dir / "eval.json")) {
    std::ifstream ev(dir / "eval.json");
    const auto j = nlohmann::json::parse(ev);
    run.accuracy = j.at("accuracy").get<double>();
    if (j.at("psnr_mean").is_number()) run.psnr = j.at("psnr_mean").get<double>();
    run.ssim = j.at("ssim_mean").get<double>();
  }
  return run;
}

std::vector<double> smooth(const std::vector<double>& y, int window) {
  if (window <= 1 || y.empty()) return y;
  std::vector<double> out(y.size());
  const int half = window / 2;
  for (size_t i = 0; i < y.size(); ++i) {
    const size_t lo = i >= static_cast<size_t>(half) ? i - half : 0;
    const size_t hi = std::min(y.size(), i + half + 1);
    double s = 0.0;
    for (size_t k = lo; k < hi; ++k) s += y[k];
    out[i] = s / static_cast<double>(hi - lo);
  }
  return out;
}

namespace {

const std::vector<cv::Scalar> kPalette{{180, 119, 31}, {14, 127, 255}, {44, 160, 44},  {40, 39, 214},
                                       {189, 103, 148}, {75, 86, 140}, {194, 119, 227}, {127, 127, 127},
                                       {34, 189, 188},  {207, 190, 23}};

std::string tick_text(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

void plot_lines(const std::vector<PlotSeries>& series, const PlotOptions& o, const fs::path& out) {
  auto tx = [&](double v) { return o.log_x ? std::log10(std::max(v, 1e-12)) : v; };
  auto ty = [&](double v) { return o.log_y ? std::log10(std::max(v, 1e-12)) : v; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  cv::Mat img(o.height, o.width, CV_8UC3, cv::Scalar(255, 255, 255));
  const int left = 80, right = 220, top = 40, bottom = 60;
  const cv::Rect area(left, top, o.width - left - right, o.height - top - bottom);
  auto px = [&](double x, double y) {
    return cv::Point(area.x + static_cast<int>(std::lround((tx(x) - x0) / (x1 - x0) * area.width)),
                     area.y + area.height - static_cast<int>(std::lround((ty(y) - y0) / (y1 - y0) * area.height)));
  };
  const auto font = cv::FONT_HERSHEY_SIMPLEX;
  cv::rectangle(img, area, cv::Scalar(0, 0, 0), 1);
  for (int i = 0; i <= 4; ++i) {
    const double fy = y0 + (y1 - y0) * i / 4.0, fx = x0 + (x1 - x0) * i / 4.0;
    const int yy = area.y + area.height - area.height * i / 4, xx = area.x + area.width * i / 4;
    cv::line(img, {area.x, yy}, {area.x + area.width, yy}, cv::Scalar(225, 225, 225), 1);
    cv::putText(img, tick_text(o.log_y ? std::pow(10.0, fy) : fy), {4, yy + 4}, font, 0.4, cv::Scalar(0, 0, 0), 1,
                cv::LINE_AA);
    cv::putText(img, tick_text(o.log_x ? std::pow(10.0, fx) : fx), {xx - 14, area.y + area.height + 18}, font, 0.4,
                cv::Scalar(0, 0, 0), 1, cv::LINE_AA);
  }
  cv::putText(img, o.title, {left, 26}, font, 0.6, cv::Scalar(0, 0, 0), 1, cv::LINE_AA);
  cv::putText(img, o.x_label, {area.x + area.width / 2 - 30, o.height - 14}, font, 0.5, cv::Scalar(0, 0, 0), 1,
              cv::LINE_AA);
  cv::putText(img, o.y_label, {4, top - 8}, font, 0.45, cv::Scalar(0, 0, 0), 1, cv::LINE_AA);

  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const auto color = kPalette[k % kPalette.size()];
    std::vector<cv::Point> pts;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (std::isfinite(s.y[i])) pts.push_back(px(s.x[i], s.y[i]));
    }
    if (pts.size() == 1) cv::circle(img, pts[0], 3, color, cv::FILLED, cv::LINE_AA);
    if (pts.size() > 1) cv::polylines(img, pts, false, color, 1, cv::LINE_AA);
    if (s.x.size() <= 12) {
      for (const auto& p : pts) cv::circle(img, p, 3, color, cv::FILLED, cv::LINE_AA);
    }
    const int ly = top + 14 + 18 * static_cast<int>(k);
    cv::line(img, {o.width - right + 10, ly - 4}, {o.width - right + 30, ly - 4}, color, 2);
    cv::putText(img, s.label, {o.width - right + 36, ly}, font, 0.4, cv::Scalar(0, 0, 0), 1, cv::LINE_AA);
  }
  fs::create_directories(out.parent_path().empty() ? fs::path(".") : out.parent_path());
  if (!cv::imwrite(out.string(), img)) throw Error("cannot write plot " + out.string());
}

nlohmann::json build_report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
  if (run_dirs.empty()) throw Error("report: no runs given");
  std::vector<RunSummary> runs;
  for (const auto& d : run_dirs) runs.push_back(read_run(d));
  fs::create_directories(out_dir);

  std::vector<PlotSeries> psm, sfm;
  for (const auto& r : runs) {
    PlotSeries p{r.label, {}, {}}, s{r.label, {}, {}};
    for (const auto& row : r.log) {
      p.x.push_back(row.step);
      p.y.push_back(row.psm);
      s.x.push_back(row.step);
      s.y.push_back(row.sfm);
    }
    const int w = std::max(1, static_cast<int>(p.y.size() / 50));
    p.y = smooth(p.y, w);
    s.y = smooth(s.y, w);
    psm.push_back(std::move(p));
    sfm.push_back(std::move(s));
  }
  plot_lines(psm, {"pixel loss (smoothed)", "step", "psm", true}, out_dir / "loss_trend_psm.png");
  plot_lines(sfm, {"attention loss (smoothed)", "step", "sfm", true}, out_dir / "loss_trend_sfm.png");

  nlohmann::json summary{{"runs", nlohmann::json::array()}};
  // lambda -> accuracies, for runs with default norms and no filter.
  std::map<double, std::vector<double>> sweep;
  for (const auto& r : runs) {
    nlohmann::json j{{"dir", r.dir.string()}, {"label", r.label}, {"train", r.config}};
    if (!r.log.empty()) j["final"] = r.log.back();
    if (r.accuracy) j["accuracy"] = *r.accuracy;
    if (r.psnr) j["psnr"] = *r.psnr;
    if (r.ssim) j["ssim"] = *r.ssim;
    summary["runs"].push_back(j);
    if (r.accuracy && r.config.attention_filter == AttentionFilter::kAll && r.config.psm_norm == Norm::kL2 &&
        r.config.sfm_norm == Norm::kL1) {
      sweep[r.config.lambda_sfm].push_back(*r.accuracy);
    }
  }
  if (!sweep.empty()) {
    PlotSeries mean{"mean accuracy", {}, {}};
    nlohmann::json table = nlohmann::json::array();
    size_t i = 0;
    for (const auto& [lambda, accs] : sweep) {
      double m = 0.0;
      for (double a : accs) m += a;
      m /= static_cast<double>(accs.size());
      // lambda = 0 is drawn at position 0 on an index axis so log spacing is not needed.
      mean.x.push_back(static_cast<double>(i++));
      mean.y.push_back(m);
      table.push_back({{"lambda_sfm", lambda}, {"accuracies", accs}, {"mean", m}});
    }
    std::string ticks;
    for (const auto& [lambda, accs] : sweep) ticks += (ticks.empty() ? "" : ", ") + tick_text(lambda);
    plot_lines({mean}, {"evaluator accuracy vs lambda (" + ticks + ")", "lambda index", "accuracy"},
               out_dir / "lambda_sweep.png");
    summary["lambda_sweep"] = table;
  }
  std::ofstream(out_dir / "summary.json") << summary.dump(2) << '\n';
  return summary;
}

}  // namespace strokegestalt
