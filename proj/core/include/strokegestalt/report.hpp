#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "strokegestalt/training.hpp"

namespace strokegestalt {

std::vector<TrainLogRow> read_train_log(const std::filesystem::path& path);

struct RunSummary {
  std::filesystem::path dir;
  std::string label;
  TrainConfig config;
  std::vector<TrainLogRow> log;
  /// From dir/eval.json when present.
  std::optional<double> accuracy;
  std::optional<double> psnr;
  std::optional<double> ssim;
};

/// Reads config.json, train_log.jsonl and, if present, eval.json of a run.
RunSummary read_run(const std::filesystem::path& dir);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  bool log_x = false;
  int width = 900;
  int height = 560;
};

/// Line plot rendered with OpenCV and written as PNG.
void plot_lines(const std::vector<PlotSeries>& series, const PlotOptions& options, const std::filesystem::path& out);

/// Moving average over a centred window (used to smooth loss curves).
std::vector<double> smooth(const std::vector<double>& y, int window);

/// Writes loss_trend.png (psm and sfm per run), lambda_sweep.png (accuracy
/// against lambda, when runs carry eval.json) and summary.json into out_dir.
/// Returns the summary.
nlohmann::json build_report(const std::vector<std::filesystem::path>& runs, const std::filesystem::path& out_dir);

}  // namespace strokegestalt
