#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>

#include "strokegestalt/degrade.hpp"
#include "strokegestalt/stroke_codec.hpp"

namespace strokegestalt {

inline constexpr const char* kGeneratorVersion = "strokegestalt-synth/1";

/// One LR/HR pair with its character- and stroke-level labels.
struct TextSample {
  std::string sample_id;
  std::string split;
  std::string text;
  StrokeLabel stroke_label;
  cv::Mat lr_image;  // RGB float32 [0,1]
  cv::Mat hr_image;
  uint64_t seed = 0;
};

/// One line of manifest.jsonl. Paths are relative to the dataset root.
struct ManifestRow {
  std::string id;
  std::string split;
  std::string text;
  std::vector<int> stroke_ids;
  std::string lr_path;
  std::string hr_path;
  std::array<int, 3> lr_shape{};  // H, W, C
  std::array<int, 3> hr_shape{};
  uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const ManifestRow& r);
void from_json(const nlohmann::json& j, ManifestRow& r);

struct DatasetBuildOptions {
  cv::Size hr_size{128, 32};
  double test_fraction = 0.2;
  uint64_t seed = 0;
  /// Samples whose stroke label (incl. eos) exceeds this are rejected.
  int max_stroke_len = 32;
  DegradationSpec degradation;
};

/// Renders, degrades and writes every corpus entry, plus manifest.jsonl,
/// meta.json and a copy of the stroke table. The last
/// round(test_fraction * n) entries form the test split.
/// Returns the manifest path. Throws CodecError for unencodable text.
std::filesystem::path build_dataset(const std::vector<std::string>& corpus, const StrokeTable& table,
                                    const DatasetBuildOptions& options, const std::filesystem::path& out_dir);

/// Random lowercase alphanumeric words; a stand-in lexicon for rendering.
std::vector<std::string> make_random_corpus(size_t n, uint64_t seed, int min_len = 3, int max_len = 7,
                                            double digit_fraction = 0.2);

/// Reads a corpus file: one word per line, blank lines and `#` comments skipped.
std::vector<std::string> read_corpus(const std::filesystem::path& path);

/// Opened dataset directory. Rows are kept in manifest order; images are read
/// on demand by load().
class Dataset {
 public:
  /// Accepts the dataset directory or its manifest.jsonl path.
  static Dataset open(const std::filesystem::path& path);

  const std::filesystem::path& root() const { return root_; }
  const nlohmann::json& meta() const { return meta_; }
  std::string stroke_table_hash() const;
  /// The stroke table copied into the dataset at build time.
  StrokeTable stroke_table() const;

  const std::vector<ManifestRow>& rows() const { return rows_; }
  std::vector<ManifestRow> rows(const std::string& split) const;

  /// Loads both images and validates the pair. When `table` is given, the
  /// stored stroke ids are checked against a fresh encoding of the text.
  /// Errors name the sample id.
  TextSample load(const ManifestRow& row, const StrokeTable* table = nullptr) const;

 private:
  std::filesystem::path root_;
  nlohmann::json meta_;
  std::vector<ManifestRow> rows_;
};

/// Single-consumer view over one split of a manifest, loading lazily.
class SampleSequence {
 public:
  SampleSequence(Dataset dataset, std::string split);

  size_t size() const { return rows_.size(); }
  const ManifestRow& row(size_t i) const { return rows_.at(i); }
  TextSample at(size_t i) const;
  const Dataset& dataset() const { return dataset_; }

 private:
  Dataset dataset_;
  std::string split_;
  std::vector<ManifestRow> rows_;
};

SampleSequence load_pairs(const std::filesystem::path& manifest, const std::string& split);

}  // namespace strokegestalt
