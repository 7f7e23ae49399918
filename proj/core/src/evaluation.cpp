#include "strokegestalt/evaluation.hpp"

#include <cmath>

#include <torch/torch.h>

#include "strokegestalt/dataset.hpp"
#include "strokegestalt/degrade.hpp"
#include "strokegestalt/error.hpp"
#include "strokegestalt/hash.hpp"
#include "strokegestalt/image_ops.hpp"
#include "strokegestalt/metrics.hpp"
#include "strokegestalt/runtime.hpp"
#include "strokegestalt/text.hpp"

namespace fs = std::filesystem;

namespace strokegestalt {

std::vector<int> CharVocabulary::encode(const std::string& text) {
  const auto norm = normalize_text(text);
  if (norm.empty()) throw CodecError("cannot encode empty text");
  std::vector<int> ids;
  for (char c : norm) {
    const auto pos = kChars.find(c);
    if (pos == std::string_view::npos) throw CodecError("character outside evaluator alphabet in '" + text + "'");
    ids.push_back(static_cast<int>(pos) + 1);
  }
  ids.push_back(0);
  return ids;
}

std::string CharVocabulary::decode(const std::vector<int>& ids) {
  std::string out;
  for (int id : ids) {
    if (id == 0) break;
    if (id >= 1 && id <= size()) out.push_back(kChars[id - 1]);
  }
  return out;
}

namespace {

LabeledImages load_char_split(const Dataset& ds, const std::string& split) {
  LabeledImages out;
  std::vector<torch::Tensor> imgs;
  for (const auto& row : ds.rows(split)) {
    auto s = ds.load(row);
    imgs.push_back(image_to_tensor(to_gray(s.hr_image)));
    out.labels.push_back(CharVocabulary::encode(row.text));
  }
  if (imgs.empty()) throw DataError("split '" + split + "' is empty");
  out.images = torch::stack(imgs);
  return out;
}

// Blur from the dataset's degradation family, applied at HR resolution with
// no resampling. Restoring real LR copies with bicubic instead would teach the
// evaluator that one upsampler's artifacts and bias it toward the bicubic
// baseline.
torch::Tensor blurred_views(const Dataset& ds, const std::string& split) {
  const auto spec = ds.meta().at("degradation").get<DegradationSpec>();
  std::vector<torch::Tensor> imgs;
  for (const auto& row : ds.rows(split)) {
    cv::Mat img = ds.load(row).hr_image;
    for (const auto& op : sample_degradation(spec, derive_seed(row.seed, "evaluator-view")).ops) {
      img = apply_blur(img, op);
    }
    imgs.push_back(image_to_tensor(to_gray(img)));
  }
  return torch::stack(imgs);
}

nlohmann::json psnr_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf"); }

double psnr_from_json(const nlohmann::json& j) {
  return j.is_string() ? kPsnrIdentical : j.get<double>();
}

}  // namespace

Checkpoint train_evaluator(const fs::path& dataset, const RecognizerConfig& config,
                           const RecognizerTrainOptions& options) {
  if (config.vocab_size != CharVocabulary::vocab_size()) {
    throw Error("evaluator vocab_size must be " + std::to_string(CharVocabulary::vocab_size()));
  }
  const auto ds = Dataset::open(dataset);
  auto train = load_char_split(ds, "train");
  const auto test = load_char_split(ds, "test");
  if (options.alternate_prob > 0.0) train.alternates = blurred_views(ds, "train");
  seed_torch(options.seed);
  Recognizer model(config);
  const auto r = train_recognizer(model, train, test, options);
  nlohmann::json meta{{"steps", r.steps},
                      {"final_loss", r.final_loss},
                      {"heldout_token_accuracy", r.heldout_token_accuracy},
                      {"heldout_sequence_accuracy", r.heldout_sequence_accuracy},
                      {"train_options", options},
                      {"alphabet", std::string(CharVocabulary::kChars)},
                      {"curve", r.curve}};
  return make_recognizer_checkpoint(model, "evaluator", "", meta);
}

Recognizer load_evaluator(const Checkpoint& ckpt) {
  if (ckpt.kind != "recognizer" || ckpt.config.value("role", std::string{}) != "evaluator") {
    throw CheckpointError("not an evaluator checkpoint");
  }
  auto model = load_recognizer(ckpt);
  if (model->config().vocab_size != CharVocabulary::vocab_size()) {
    throw CheckpointError("evaluator checkpoint has the wrong vocabulary size");
  }
  return model;
}

std::string to_string(EvalSource s) {
  switch (s) {
    case EvalSource::kSR: return "sr";
    case EvalSource::kBicubic: return "bicubic";
    case EvalSource::kHR: return "hr";
  }
  return "sr";
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"id", row.id},
                    {"text", row.text},
                    {"prediction", row.prediction},
                    {"correct", row.correct},
                    {"psnr", psnr_json(row.psnr)},
                    {"ssim", row.ssim}});
  }
  j = nlohmann::json{{"split", r.split},
                     {"source", r.source},
                     {"n_samples", r.n_samples},
                     {"psnr_mean", psnr_json(r.psnr_mean)},
                     {"ssim_mean", r.ssim_mean},
                     {"accuracy", r.accuracy},
                     {"fingerprint", r.fingerprint},
                     {"rows", rows}};
}

void from_json(const nlohmann::json& j, EvalReport& r) {
  j.at("split").get_to(r.split);
  j.at("source").get_to(r.source);
  j.at("n_samples").get_to(r.n_samples);
  r.psnr_mean = psnr_from_json(j.at("psnr_mean"));
  j.at("ssim_mean").get_to(r.ssim_mean);
  j.at("accuracy").get_to(r.accuracy);
  r.fingerprint = j.value("fingerprint", nlohmann::json::object());
  r.rows.clear();
  for (const auto& row : j.value("rows", nlohmann::json::array())) {
    r.rows.push_back({row.at("id"), row.at("text"), row.at("prediction"), row.at("correct"),
                      psnr_from_json(row.at("psnr")), row.at("ssim")});
  }
}

EvalReport evaluate(const fs::path& dataset, Recognizer& evaluator, EvalSource source, SRModel* sr,
                    const EvalOptions& options) {
  if (source == EvalSource::kSR && (sr == nullptr || !*sr)) throw Error("evaluate: SR source needs an SR model");
  const auto ds = Dataset::open(dataset);
  const auto rows = ds.rows(options.split);
  if (rows.empty()) throw DataError("evaluate: split '" + options.split + "' is empty");
  evaluator->eval();
  if (sr) (*sr)->eval();
  torch::NoGradGuard no_grad;

  EvalReport report;
  report.split = options.split;
  report.source = to_string(source);
  report.n_samples = rows.size();
  report.fingerprint = {{"stroke_table_hash", ds.stroke_table_hash()},
                        {"evaluator_hash", parameter_hash(*evaluator)},
                        {"sr_hash", sr ? parameter_hash(**sr) : std::string{}},
                        {"generator_version", ds.meta().value("generator_version", std::string{})}};

  std::vector<std::string> preds, gts;
  double psnr_sum = 0.0, ssim_sum = 0.0;
  size_t infinite = 0;
  for (size_t start = 0; start < rows.size(); start += static_cast<size_t>(options.batch_size)) {
    const size_t end = std::min(rows.size(), start + static_cast<size_t>(options.batch_size));
    std::vector<cv::Mat> hr, out;
    std::vector<torch::Tensor> lr;
    for (size_t i = start; i < end; ++i) {
      auto s = ds.load(rows[i]);
      hr.push_back(s.hr_image);
      if (source == EvalSource::kHR) {
        out.push_back(s.hr_image);
      } else if (source == EvalSource::kBicubic) {
        cv::Mat up = bicubic_resize(s.lr_image, s.hr_image.size());
        clamp01(up);
        out.push_back(up);
      } else {
        lr.push_back(image_to_tensor(s.lr_image));
      }
    }
    if (source == EvalSource::kSR) {
      auto sr_batch = upsample(*sr, torch::stack(lr));
      for (int64_t k = 0; k < sr_batch.size(0); ++k) out.push_back(tensor_to_image(sr_batch[k]));
    }
    std::vector<torch::Tensor> batch;
    for (const auto& m : out) batch.push_back(image_to_tensor(m));
    auto greedy = recognize_greedy(evaluator, torch::stack(batch));
    for (size_t i = start; i < end; ++i) {
      const size_t k = i - start;
      EvalRow row;
      row.id = rows[i].id;
      row.text = rows[i].text;
      row.prediction = CharVocabulary::decode(greedy.ids[k]);
      row.correct = normalize_text(row.prediction) == normalize_text(row.text);
      row.psnr = psnr(out[k], hr[k]);
      row.ssim = ssim(out[k], hr[k]);
      if (std::isfinite(row.psnr)) {
        psnr_sum += row.psnr;
      } else {
        ++infinite;
      }
      ssim_sum += row.ssim;
      preds.push_back(row.prediction);
      gts.push_back(row.text);
      if (options.keep_rows) report.rows.push_back(std::move(row));
    }
  }
  const auto n = static_cast<double>(rows.size());
  // Identical pairs carry no finite PSNR; average the rest unless all are identical.
  report.psnr_mean = infinite == rows.size() ? kPsnrIdentical : psnr_sum / static_cast<double>(rows.size() - infinite);
  report.ssim_mean = ssim_sum / n;
  report.accuracy = recognition_accuracy(preds, gts);
  return report;
}

EvalReport evaluate_files(const fs::path& dataset, const fs::path& evaluator_ckpt,
                          const std::optional<fs::path>& sr_ckpt, EvalSource source, const EvalOptions& options) {
  auto evaluator = load_evaluator(load_checkpoint(evaluator_ckpt));
  std::optional<SRModel> sr;
  if (sr_ckpt) {
    const auto ckpt = load_checkpoint(*sr_ckpt);
    const auto ds = Dataset::open(dataset);
    const auto recorded = ckpt.config.value("stroke_table_hash", std::string{});
    if (recorded != ds.stroke_table_hash()) {
      throw CheckpointError("SR checkpoint was trained on a different stroke table than " + dataset.string());
    }
    sr = load_sr_model(ckpt);
  }
  auto report = evaluate(dataset, evaluator, source, sr ? &*sr : nullptr, options);
  report.fingerprint["evaluator_checkpoint"] = fs::absolute(evaluator_ckpt).string();
  if (sr_ckpt) report.fingerprint["sr_checkpoint"] = fs::absolute(*sr_ckpt).string();
  return report;
}

}  // namespace strokegestalt
