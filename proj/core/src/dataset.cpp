#include "strokegestalt/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "strokegestalt/error.hpp"
#include "strokegestalt/hash.hpp"
#include "strokegestalt/image_ops.hpp"
#include "strokegestalt/render.hpp"
#include "strokegestalt/text.hpp"

namespace fs = std::filesystem;

namespace strokegestalt {

void to_json(nlohmann::json& j, const ManifestRow& r) {
  j = nlohmann::json{{"id", r.id},
                     {"split", r.split},
                     {"text", r.text},
                     {"stroke_ids", r.stroke_ids},
                     {"lr_path", r.lr_path},
                     {"hr_path", r.hr_path},
                     {"lr_shape", r.lr_shape},
                     {"hr_shape", r.hr_shape},
                     {"seed", r.seed}};
}

void from_json(const nlohmann::json& j, ManifestRow& r) {
  j.at("id").get_to(r.id);
  j.at("split").get_to(r.split);
  j.at("text").get_to(r.text);
  j.at("stroke_ids").get_to(r.stroke_ids);
  j.at("lr_path").get_to(r.lr_path);
  j.at("hr_path").get_to(r.hr_path);
  j.at("lr_shape").get_to(r.lr_shape);
  j.at("hr_shape").get_to(r.hr_shape);
  j.at("seed").get_to(r.seed);
}

namespace {

std::string format_id(const std::string& split, size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%06zu", split.c_str(), index);
  return buf;
}

std::string serialize_table(const StrokeTable& t) {
  std::ostringstream os;
  os << "# copied by " << kGeneratorVersion << "\n";
  os << "script " << t.script_name() << " strokes " << t.stroke_count() << "\n";
  for (int i = 0; i < t.stroke_count(); ++i) os << "stroke " << (i + 1) << ' ' << t.stroke_names()[i] << "\n";
  for (const auto& [c, ids] : t.entries()) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(c));
    os << "char " << buf << ' ';
    for (size_t i = 0; i < ids.size(); ++i) os << (i ? "," : "") << ids[i];
    os << "\n";
  }
  return os.str();
}

}  // namespace

fs::path build_dataset(const std::vector<std::string>& corpus, const StrokeTable& table,
                       const DatasetBuildOptions& options, const fs::path& out_dir) {
  options.degradation.validate();
  if (options.hr_size.width % 4 != 0 || options.hr_size.height % 4 != 0) {
    throw ShapeError("build_dataset: HR size must be divisible by 4 (LR feeds a /4 encoder after x2)");
  }
  if (corpus.empty()) throw DataError("build_dataset: empty corpus");

  // Encode everything first so a bad entry fails before anything is written.
  std::vector<StrokeLabel> labels;
  labels.reserve(corpus.size());
  for (const auto& text : corpus) {
    labels.push_back(encode_label(table, text));
    if (static_cast<int>(labels.back().size()) > options.max_stroke_len) {
      throw CodecError("stroke label of '" + text + "' has length " + std::to_string(labels.back().size()) +
                       " > max_stroke_len " + std::to_string(options.max_stroke_len));
    }
  }

  fs::create_directories(out_dir / "images" / "lr");
  fs::create_directories(out_dir / "images" / "hr");

  const size_t n = corpus.size();
  const auto n_test = static_cast<size_t>(std::lround(options.test_fraction * static_cast<double>(n)));
  const size_t n_train = n - n_test;
  const cv::Size lr_size(options.hr_size.width / 2, options.hr_size.height / 2);

  const fs::path manifest = out_dir / "manifest.jsonl";
  std::ofstream mf(manifest);
  if (!mf) throw DataError("cannot write manifest: " + manifest.string());

  for (size_t i = 0; i < n; ++i) {
    const bool train = i < n_train;
    ManifestRow row;
    row.split = train ? "train" : "test";
    row.id = format_id(row.split, train ? i : i - n_train);
    row.text = corpus[i];
    row.stroke_ids = labels[i].ids;
    row.seed = derive_seed(options.seed, row.id);
    row.lr_path = "images/lr/" + row.id + ".png";
    row.hr_path = "images/hr/" + row.id + ".png";

    const RenderStyle style = sample_style(derive_seed(row.seed, "style"));
    cv::Mat hr = quantize8(render_text_image(corpus[i], style, options.hr_size, derive_seed(row.seed, "render")));
    cv::Mat lr = degrade(hr, options.degradation, derive_seed(row.seed, "degrade"));
    write_image(out_dir / row.hr_path, hr);
    write_image(out_dir / row.lr_path, lr);
    row.hr_shape = {hr.rows, hr.cols, hr.channels()};
    row.lr_shape = {lr_size.height, lr_size.width, lr.channels()};
    mf << nlohmann::json(row).dump() << '\n';
  }
  if (!mf) throw DataError("I/O failure writing manifest: " + manifest.string());

  nlohmann::json meta{{"generator_version", kGeneratorVersion},
                      {"degradation", options.degradation},
                      {"stroke_table_hash", table.hash()},
                      {"script", table.script_name()},
                      {"hr_size", {options.hr_size.height, options.hr_size.width}},
                      {"lr_size", {lr_size.height, lr_size.width}},
                      {"seed", options.seed},
                      {"max_stroke_len", options.max_stroke_len},
                      {"counts", {{"train", n_train}, {"test", n_test}}}};
  std::ofstream(out_dir / "meta.json") << meta.dump(2) << '\n';
  std::ofstream(out_dir / "stroke_table.strokes") << serialize_table(table);
  return manifest;
}

std::vector<std::string> make_random_corpus(size_t n, uint64_t seed, int min_len, int max_len,
                                            double digit_fraction) {
  static constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";
  static constexpr std::string_view kDigits = "0123456789";
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<size_t> letter(0, kLetters.size() - 1);
  std::uniform_int_distribution<size_t> digit(0, kDigits.size() - 1);
  std::bernoulli_distribution is_digit(digit_fraction);
  std::vector<std::string> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    std::string w;
    const int l = len(rng);
    for (int k = 0; k < l; ++k) w.push_back(is_digit(rng) ? kDigits[digit(rng)] : kLetters[letter(rng)]);
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<std::string> read_corpus(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus: " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

Dataset Dataset::open(const fs::path& path) {
  Dataset ds;
  ds.root_ = fs::is_directory(path) ? path : path.parent_path();
  const fs::path manifest = fs::is_directory(path) ? path / "manifest.jsonl" : path;
  std::ifstream mf(manifest);
  if (!mf) throw DataError("cannot open manifest: " + manifest.string());
  std::string line;
  int line_no = 0;
  while (std::getline(mf, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ds.rows_.push_back(nlohmann::json::parse(line).get<ManifestRow>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError(manifest.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  const fs::path meta = ds.root_ / "meta.json";
  if (fs::exists(meta)) {
    std::ifstream mj(meta);
    ds.meta_ = nlohmann::json::parse(mj);
  }
  return ds;
}

std::string Dataset::stroke_table_hash() const {
  return meta_.value("stroke_table_hash", std::string{});
}

StrokeTable Dataset::stroke_table() const {
  return load_stroke_table(root_ / "stroke_table.strokes");
}

std::vector<ManifestRow> Dataset::rows(const std::string& split) const {
  std::vector<ManifestRow> out;
  for (const auto& r : rows_) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

TextSample Dataset::load(const ManifestRow& row, const StrokeTable* table) const {
  const auto fail = [&](const std::string& what) { return DataError("sample " + row.id + ": " + what); };
  const fs::path lr_path = root_ / row.lr_path;
  const fs::path hr_path = root_ / row.hr_path;
  if (!fs::exists(lr_path)) throw fail("missing image file " + lr_path.string());
  if (!fs::exists(hr_path)) throw fail("missing image file " + hr_path.string());

  TextSample s;
  s.sample_id = row.id;
  s.split = row.split;
  s.text = row.text;
  s.seed = row.seed;
  s.stroke_label.ids = row.stroke_ids;
  s.stroke_label.source_text = row.text;
  s.lr_image = read_image(lr_path);
  s.hr_image = read_image(hr_path);

  const auto check_shape = [&](const cv::Mat& m, const std::array<int, 3>& shape, const char* which) {
    if (m.rows != shape[0] || m.cols != shape[1] || m.channels() != shape[2]) {
      throw fail(std::string("shape mismatch vs manifest for ") + which + " image");
    }
  };
  check_shape(s.lr_image, row.lr_shape, "lr");
  check_shape(s.hr_image, row.hr_shape, "hr");
  if (s.hr_image.rows != 2 * s.lr_image.rows || s.hr_image.cols != 2 * s.lr_image.cols) {
    throw fail("HR is not exactly 2x LR");
  }
  if (row.stroke_ids.empty() || row.stroke_ids.back() != StrokeTable::kEosId ||
      std::count(row.stroke_ids.begin(), row.stroke_ids.end(), StrokeTable::kEosId) != 1) {
    throw fail("stroke label must contain exactly one trailing eos");
  }
  if (table != nullptr && encode_label(*table, row.text).ids != row.stroke_ids) {
    throw fail("stored stroke ids do not match the encoding of '" + row.text + "'");
  }
  return s;
}

SampleSequence::SampleSequence(Dataset dataset, std::string split)
    : dataset_(std::move(dataset)), split_(std::move(split)), rows_(dataset_.rows(split_)) {}

TextSample SampleSequence::at(size_t i) const { return dataset_.load(rows_.at(i)); }

SampleSequence load_pairs(const fs::path& manifest, const std::string& split) {
  if (split != "train" && split != "test") throw DataError("split must be train or test, got " + split);
  return SampleSequence(Dataset::open(manifest), split);
}

}  // namespace strokegestalt
