#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "strokegestalt/checkpoint.hpp"
#include "strokegestalt/recognizer.hpp"
#include "strokegestalt/sr_models.hpp"

namespace strokegestalt {

/// Character alphabet of the evaluator: eos = 0, '0'..'9' = 1..10,
/// 'a'..'z' = 11..36, start = 37.
class CharVocabulary {
 public:
  static constexpr std::string_view kChars = "0123456789abcdefghijklmnopqrstuvwxyz";

  static int size() { return static_cast<int>(kChars.size()); }
  /// Output symbols plus start, i.e. the evaluator's embedding rows.
  static int vocab_size() { return size() + 2; }

  /// Normalizes `text`, maps it to ids and appends eos. Throws CodecError for
  /// characters outside the alphabet or empty text.
  static std::vector<int> encode(const std::string& text);
  /// Reads ids up to the first eos; out-of-range ids are dropped.
  static std::string decode(const std::vector<int>& ids);
};

/// Character-level recognizer trained on HR images. It scores SR output only
/// and never takes part in SR training. With options.alternate_prob > 0 each
/// training image also gets a blurred copy (the dataset's blur family, a new
/// draw, at HR resolution, train split only), which makes it tolerate blur the
/// way an off-the-shelf reader does.
Checkpoint train_evaluator(const std::filesystem::path& dataset, const RecognizerConfig& config,
                           const RecognizerTrainOptions& options);
Recognizer load_evaluator(const Checkpoint& ckpt);

enum class EvalSource { kSR, kBicubic, kHR };
std::string to_string(EvalSource s);

struct EvalRow {
  std::string id;
  std::string text;
  std::string prediction;
  bool correct = false;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  std::string split;
  std::string source;  // "sr", "bicubic" or "hr"
  size_t n_samples = 0;
  /// Mean PSNR in dB over [0,1] images; +inf when every pair is identical.
  double psnr_mean = 0.0;
  double ssim_mean = 0.0;
  double accuracy = 0.0;
  nlohmann::json fingerprint;
  std::vector<EvalRow> rows;
};

/// Infinite PSNR is written as the string "inf".
void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);

struct EvalOptions {
  std::string split = "test";
  int batch_size = 64;
  bool keep_rows = true;
};

/// Scores one split of a dataset. With an SR model each LR image is
/// upsampled by it; with EvalSource::kBicubic LR images are bicubic
/// upsampled; with kHR the HR images are scored directly (accuracy upper
/// bound). PSNR/SSIM compare against HR, accuracy uses the evaluator.
EvalReport evaluate(const std::filesystem::path& dataset, Recognizer& evaluator, EvalSource source,
                    SRModel* sr = nullptr, const EvalOptions& options = {});

/// File-level wrapper: loads checkpoints, checks the SR model's stroke table
/// hash against the dataset, evaluates.
EvalReport evaluate_files(const std::filesystem::path& dataset, const std::filesystem::path& evaluator_ckpt,
                          const std::optional<std::filesystem::path>& sr_ckpt, EvalSource source,
                          const EvalOptions& options = {});

}  // namespace strokegestalt
