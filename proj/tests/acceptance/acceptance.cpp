// Acceptance suite: one PASS/FAIL line per criterion.
//
// Criteria 1-7 are self-contained. Criteria 8-11 share a toy benchmark
// (rendered corpus, pretrained recognizer and evaluator, a grid of SR runs)
// that is cached under the work directory; a stamp of the inputs decides
// whether a cached artifact can be reused.

#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "oracles.hpp"
#include "strokegestalt/dataset.hpp"
#include "strokegestalt/degrade.hpp"
#include "strokegestalt/evaluation.hpp"
#include "strokegestalt/hash.hpp"
#include "strokegestalt/losses.hpp"
#include "strokegestalt/metrics.hpp"
#include "strokegestalt/recognizer.hpp"
#include "strokegestalt/runtime.hpp"
#include "strokegestalt/sr_models.hpp"
#include "strokegestalt/stroke_codec.hpp"
#include "strokegestalt/text.hpp"
#include "strokegestalt/training.hpp"
#include "tiny_stack.hpp"

namespace fs = std::filesystem;
namespace sg = strokegestalt;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

void note(const std::string& msg) { std::cerr << "  " << msg << std::endl; }

const sg::StrokeTable& latin() {
  static const auto t = sg::load_stroke_table(STROKEGESTALT_DATA_DIR "/strokes/latin_digits.strokes");
  return t;
}

// ---------------------------------------------------------------------------
// 1-7

Outcome loss_identities() {
  torch::manual_seed(11);
  bool ok = true;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto sr = torch::rand({4, 3, 32, 128}), hr = torch::rand({4, 3, 32, 128});
    const auto a = torch::softmax(torch::randn({4, 9, 8 * 32}), -1).view({4, 9, 8, 32});
    const auto b = torch::softmax(torch::randn({4, 9, 8 * 32}), -1).view({4, 9, 8, 32});
    for (auto pn : {sg::Norm::kL1, sg::Norm::kL2}) {
      const auto psm = sg::psm_loss(sr, hr, pn);
      const auto sfm = sg::sfm_loss(a, b, sg::Norm::kL1);
      const double diff = std::abs(sg::total_loss(psm, sfm, 0.0).item<double>() - psm.item<double>());
      worst = std::max(worst, diff);
      ok = ok && diff == 0.0;
      ok = ok && sg::psm_loss(sr, sr, pn).item<double>() == 0.0;
      ok = ok && sg::sfm_loss(a, a, pn).item<double>() == 0.0;
    }
  }
  return {ok, "max |total(lambda=0) - psm| = " + fmt(worst, 17) + ", psm(x,x) = sfm(A,A) = 0 on 50 draws"};
}

Outcome gradient_check() {
  long coords = 0, passing = 0;
  double worst = 0.0;
  int64_t params = 0;
  for (uint64_t seed : {1, 2, 3}) {
    auto stack = tiny::make_stack(seed);
    params = stack.parameter_count();
    const auto r = tiny::check_gradients(stack);
    coords += r.coordinates;
    passing += r.passing;
    worst = std::max(worst, r.worst);
  }
  const double frac = static_cast<double>(passing) / static_cast<double>(coords);
  return {frac >= 0.95 && params <= 1000,
          std::to_string(params) + "-parameter stack, " + fmt(100 * frac, 2) + "% of " + std::to_string(coords) +
              " coordinates within 1e-3 relative (worst " + fmt(worst, 6) + ")"};
}

Outcome shapes_and_normalization() {
  bool ok = true;
  std::ostringstream os;
  torch::NoGradGuard no_grad;
  {
    torch::manual_seed(0);
    sg::Recognizer paper(sg::RecognizerConfig::paper(latin().vocab_size(), 32));
    paper->eval();
    const auto f = paper->encode(torch::rand({1, 3, 32, 128}));
    ok = ok && f.sizes() == std::vector<int64_t>({1, 1024, 8, 32});
    os << "paper encoder 32x128 -> " << f.size(2) << "x" << f.size(3) << "x" << f.size(1);
  }
  torch::manual_seed(0);
  sg::Recognizer toy(sg::RecognizerConfig::toy(latin().vocab_size(), 32));
  toy->freeze();
  int shapes = 0;
  for (int h = 4; h <= 48; h += 4) {
    for (int w : {4, 16, 64, 128}) {
      const auto f = toy->encode(torch::rand({2, 3, h, w}));
      ok = ok && f.sizes() == std::vector<int64_t>({2, toy->config().d_feat(), h / 4, w / 4});
      ++shapes;
    }
  }
  double worst_sum = 0.0;
  bool lengths = true;
  const auto words = sg::make_random_corpus(64, 5);
  for (size_t i = 0; i < words.size(); i += 16) {
    std::vector<std::vector<int>> labels;
    for (size_t k = i; k < i + 16; ++k) labels.push_back(sg::encode_label(latin(), words[k]).ids);
    const auto batch = sg::make_label_batch(labels, toy->config().start_id());
    const auto attn = sg::extract_attention(toy, torch::rand({16, 3, 32, 128}), batch);
    for (size_t k = 0; k < labels.size(); ++k) {
      lengths = lengths && batch.lengths[k] == static_cast<int>(labels[k].size());
      const auto valid = attn[static_cast<int64_t>(k)].narrow(0, 0, batch.lengths[k]);
      worst_sum = std::max(worst_sum, (valid.sum({1, 2}) - 1).abs().max().item<double>());
    }
    lengths = lengths && attn.size(1) == batch.shifted.size(1);
  }
  // Greedy decoding yields one map per emitted symbol.
  const auto g = sg::recognize_greedy(toy, torch::rand({4, 3, 32, 128}));
  for (size_t i = 0; i < g.ids.size(); ++i) {
    lengths = lengths && g.attention[i].size(0) == static_cast<int64_t>(g.ids[i].size());
    worst_sum = std::max(worst_sum, (g.attention[i].sum({1, 2}) - 1).abs().max().item<double>());
  }
  ok = ok && lengths && worst_sum <= 1e-5;
  os << "; " << shapes << " toy input shapes at H/4 x W/4; attention length = label length: "
     << (lengths ? "yes" : "no") << "; max |sum - 1| = " << worst_sum;
  return {ok, os.str()};
}

Outcome frozen_recognizer() {
  torch::manual_seed(4);
  sg::Recognizer rec(sg::RecognizerConfig::toy(latin().vocab_size(), 32));
  rec->freeze();
  sg::SRConfig sc;
  sc.backbone = sg::Backbone::kSrcnn;
  sc.channels = 8;
  sc.stn_channels = 4;
  sg::SRModel sr(sc);
  sg::SRTrainingData data;
  data.lr = torch::rand({16, 3, 8, 32});
  data.hr = torch::rand({16, 3, 16, 64});
  for (const auto& w : sg::make_random_corpus(16, 8, 1, 3)) data.labels.push_back(sg::encode_label(latin(), w).ids);
  sg::TrainConfig cfg;
  cfg.steps = 1000;
  cfg.batch_size = 4;
  const auto before = sg::parameter_hash(*rec);
  const auto res = sg::train_sr(sr, rec, data, cfg);
  const auto after = sg::parameter_hash(*rec);
  const bool ok = before == after && res.recognizer_hash_before == before && res.recognizer_hash_after == before &&
                  res.log.size() == 1000;
  return {ok, "hash " + before.substr(0, 16) + "... " + (before == after ? "unchanged" : "CHANGED") + " after " +
                  std::to_string(res.log.size()) + " steps"};
}

Outcome metric_oracles() {
  cv::RNG rng(21);
  double worst_psnr = 0.0, worst_ssim = 0.0;
  for (int i = 0; i < 100; ++i) {
    cv::Mat a(32, 48, CV_32FC3), noise(32, 48, CV_32FC3);
    rng.fill(a, cv::RNG::UNIFORM, 0.0, 1.0);
    rng.fill(noise, cv::RNG::NORMAL, 0.0, 0.05 + 0.002 * i);
    cv::Mat b = a + noise;
    cv::min(cv::max(b, 0.0), 1.0, b);
    worst_psnr = std::max(worst_psnr, std::abs(sg::psnr(a, b) - oracle::psnr(a, b)));
    worst_ssim = std::max(worst_ssim, std::abs(sg::ssim(a, b) - oracle::ssim(a, b)));
  }
  const cv::Mat zero(8, 8, CV_32FC3, cv::Scalar::all(0)), half(8, 8, CV_32FC3, cv::Scalar::all(0.5));
  const double p = sg::psnr(zero, half);
  bool shuffle_ok = true;
  torch::manual_seed(3);
  for (int r : {1, 2, 3, 4}) {
    const auto in = torch::randn({2, 2 * r * r, 5, 7});
    shuffle_ok = shuffle_ok && torch::equal(sg::pixel_shuffle(in, r), oracle::pixel_shuffle(in, r));
  }
  const bool ok = worst_psnr <= 1e-9 && worst_ssim <= 1e-6 && std::abs(p - 6.0206) < 5e-5 && shuffle_ok;
  std::ostringstream os;
  os << "psnr max dev " << worst_psnr << ", ssim max dev " << worst_ssim << " on 100 pairs; psnr(0, 0.5) = "
     << fmt(p) << " dB; pixel_shuffle index law " << (shuffle_ok ? "exact" : "MISMATCH");
  return {ok, os.str()};
}

Outcome codec_completeness() {
  const auto& t = latin();
  bool ok = t.stroke_count() == 9 && t.entries().size() == 36;
  for (char c : std::string("0123456789abcdefghijklmnopqrstuvwxyz")) {
    ok = ok && t.contains(static_cast<char32_t>(c));
  }
  std::mt19937_64 rng(99);
  const std::string pool = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1), len(1, 12);
  int law = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string s;
    for (size_t k = len(rng); k > 0; --k) s.push_back(pool[pick(rng)]);
    size_t expected = 1;
    for (char c : sg::normalize_text(s)) expected += t.decompose(static_cast<char32_t>(c)).size();
    const auto label = sg::encode_label(t, s);
    if (label.size() == expected && label.ids.back() == 0) ++law;
  }
  const int h = t.stroke_id("horizontal"), v = t.stroke_id("vertical");
  const bool one = t.decompose(U'1') == std::vector<int>{v};
  const bool seven = t.decompose(U'7') == std::vector<int>{h, v};
  ok = ok && law == 1000 && one && seven;
  return {ok, std::to_string(t.entries().size()) + " characters over " + std::to_string(t.stroke_count()) +
                  " strokes; length law " + std::to_string(law) + "/1000; '1' -> [vertical] " + (one ? "ok" : "NO") +
                  ", '7' -> [horizontal, vertical] " + (seven ? "ok" : "NO")};
}

Outcome degradation_generator() {
  const sg::DegradationSpec spec;
  cv::Mat hr(32, 128, CV_32FC3);
  cv::RNG(5).fill(hr, cv::RNG::UNIFORM, 0.0, 1.0);
  bool dims = true, det = true;
  for (uint64_t s = 0; s < 20; ++s) {
    const auto a = sg::degrade(hr, spec, s), b = sg::degrade(hr, spec, s);
    dims = dims && a.cols == 64 && a.rows == 16;
    det = det && cv::norm(a, b, cv::NORM_INF) == 0.0;
  }
  std::array<int, 5> counts{};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[sg::sample_degradation(spec, sg::derive_seed(77, std::to_string(i))).ops.size() - 1];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - draws / 5.0) * (c - draws / 5.0) / (draws / 5.0);
  const double p = 1.0 - boost::math::cdf(boost::math::chi_squared(4), chi2);
  std::ostringstream os;
  os << "dims halved " << (dims ? "yes" : "no") << "; n counts {" << counts[0] << "," << counts[1] << ","
     << counts[2] << "," << counts[3] << "," << counts[4] << "} chi2 = " << fmt(chi2, 3) << " p = " << fmt(p, 3)
     << "; deterministic " << (det ? "yes" : "no");
  return {dims && det && p > 0.01, os.str()};
}

// ---------------------------------------------------------------------------
// Toy benchmark

class Benchmark {
 public:
  Benchmark(fs::path work, json budget) : work_(std::move(work)), budget_(std::move(budget)) {
    fs::create_directories(work_);
  }

  fs::path dataset() {
    const auto dir = work_ / "data";
    const json stamp{{"corpus_size", budget_["corpus_size"]},
                     {"corpus_seed", budget_["corpus_seed"]},
                     {"dataset_seed", budget_["dataset_seed"]},
                     {"test_fraction", budget_["test_fraction"]},
                     {"table", latin().hash()},
                     {"generator", sg::kGeneratorVersion}};
    if (!fresh(dir, stamp)) {
      note("building toy dataset");
      fs::remove_all(dir);
      sg::DatasetBuildOptions opts;
      opts.seed = budget_["dataset_seed"];
      opts.test_fraction = budget_["test_fraction"];
      sg::build_dataset(sg::make_random_corpus(budget_["corpus_size"], budget_["corpus_seed"]), latin(), opts, dir);
      mark(dir, stamp);
    }
    return dir;
  }

  /// Stroke-level recognizer; returns checkpoint path.
  fs::path recognizer() {
    const auto data = dataset();
    const auto dir = work_ / "recognizer";
    const json& cfg = budget_["recognizer"];
    const json stamp{{"data", stamp_of(data)}, {"config", cfg}};
    if (!fresh(dir, stamp)) {
      note("pretraining stroke recognizer");
      fs::remove_all(dir);
      auto opts = cfg["train"].get<sg::RecognizerTrainOptions>();
      opts.log = note;
      const auto arch = architecture(cfg["architecture"], latin().vocab_size(), 32);
      const auto ckpt = sg::pretrain_recognizer(data, arch, opts);
      fs::create_directories(dir);
      sg::save_checkpoint(dir / "recognizer.ckpt", ckpt);
      std::ofstream(dir / "metrics.json") << ckpt.metadata.dump(2);
      mark(dir, stamp);
    }
    return dir / "recognizer.ckpt";
  }

  fs::path evaluator() {
    const auto data = dataset();
    const auto dir = work_ / "evaluator";
    const json& cfg = budget_["evaluator"];
    const json stamp{{"data", stamp_of(data)}, {"config", cfg}};
    if (!fresh(dir, stamp)) {
      note("training character evaluator");
      fs::remove_all(dir);
      auto opts = cfg["train"].get<sg::RecognizerTrainOptions>();
      opts.log = note;
      const auto arch = architecture(cfg["architecture"], sg::CharVocabulary::vocab_size(), 16);
      const auto ckpt = sg::train_evaluator(data, arch, opts);
      fs::create_directories(dir);
      sg::save_checkpoint(dir / "evaluator.ckpt", ckpt);
      std::ofstream(dir / "metrics.json") << ckpt.metadata.dump(2);
      mark(dir, stamp);
    }
    return dir / "evaluator.ckpt";
  }

  json recognizer_metrics() {
    recognizer();
    std::ifstream in(work_ / "recognizer" / "metrics.json");
    return json::parse(in);
  }

  json evaluator_metrics() {
    evaluator();
    std::ifstream in(work_ / "evaluator" / "metrics.json");
    return json::parse(in);
  }

  struct RunSpec {
    double lambda = 50.0;
    sg::Norm psm = sg::Norm::kL2;
    sg::Norm sfm = sg::Norm::kL1;
    sg::AttentionFilter filter = sg::AttentionFilter::kAll;
    uint64_t seed = 1;

    std::string name() const {
      std::ostringstream os;
      os << "lambda" << lambda << "_" << sg::to_string(psm) << sg::to_string(sfm) << "_" << sg::to_string(filter)
         << "_s" << seed;
      return os.str();
    }
  };

  /// Test-split accuracy of one SR run (trained on first use).
  double accuracy(const RunSpec& spec) {
    const auto data = dataset();
    const auto rec = recognizer();
    const auto ev = evaluator();
    const auto dir = work_ / "runs" / spec.name();
    sg::TrainConfig tc = budget_["train"].get<sg::TrainConfig>();
    tc.lambda_sfm = spec.lambda;
    tc.psm_norm = spec.psm;
    tc.sfm_norm = spec.sfm;
    tc.attention_filter = spec.filter;
    tc.seed = spec.seed;
    const auto sr = budget_["sr"].get<sg::SRConfig>();
    const json stamp{{"data", stamp_of(data)}, {"recognizer", stamp_of(rec.parent_path())}, {"sr", sr}, {"train", tc}};
    if (!fresh(dir, stamp)) {
      note("training SR run " + spec.name());
      fs::remove_all(dir);
      const auto t0 = std::chrono::steady_clock::now();
      sg::TrainHooks hooks;
      hooks.log = note;
      sg::train_sr_run(data, rec, sr, tc, dir, hooks);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      note(spec.name() + ": trained in " + fmt(secs, 0) + " s");
      mark(dir, stamp);
    }
    // Scoring is cached separately so a new evaluator does not retrain runs.
    const json eval_stamp{{"run", stamp_of(dir)}, {"evaluator", parameter_hash(ev.parent_path())}};
    if (stamp_of(dir, ".eval_stamp") != eval_stamp.dump()) {
      sg::EvalOptions eo;
      eo.keep_rows = false;
      const auto rep = sg::evaluate_files(data, ev, dir / "sr_final.ckpt", sg::EvalSource::kSR, eo);
      std::ofstream(dir / "eval.json") << json(rep).dump(2);
      note(spec.name() + ": accuracy " + fmt(rep.accuracy) + " psnr " + fmt(rep.psnr_mean, 2));
      std::ofstream(dir / ".eval_stamp") << eval_stamp.dump();
    }
    std::ifstream in(dir / "eval.json");
    return json::parse(in).at("accuracy").get<double>();
  }

  /// Accuracy on HR images or bicubic-upsampled LR images.
  double baseline(sg::EvalSource source) {
    const auto data = dataset();
    const auto ev = evaluator();
    const auto dir = work_ / ("baseline_" + sg::to_string(source));
    const json stamp{{"data", stamp_of(data)}, {"evaluator", parameter_hash(ev.parent_path())}};
    if (!fresh(dir, stamp)) {
      fs::remove_all(dir);
      fs::create_directories(dir);
      sg::EvalOptions eo;
      eo.keep_rows = false;
      const auto rep = sg::evaluate_files(data, ev, std::nullopt, source, eo);
      std::ofstream(dir / "eval.json") << json(rep).dump(2);
      mark(dir, stamp);
    }
    std::ifstream in(dir / "eval.json");
    return json::parse(in).at("accuracy").get<double>();
  }

  std::vector<uint64_t> seeds() const { return budget_["seeds"].get<std::vector<uint64_t>>(); }

 private:
  static sg::RecognizerConfig architecture(const json& j, int vocab, int max_len) {
    if (j.is_string()) {
      const auto name = j.get<std::string>();
      if (name == "paper") return sg::RecognizerConfig::paper(vocab, max_len);
      if (name == "tiny") return sg::RecognizerConfig::tiny(vocab, max_len);
      return sg::RecognizerConfig::toy(vocab, max_len);
    }
    json full = j;
    full["vocab_size"] = vocab;
    full["max_len"] = max_len;
    return full.get<sg::RecognizerConfig>();
  }

  static std::string stamp_of(const fs::path& dir, const char* name = ".stamp") {
    std::ifstream in(dir / name);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }
  // Keyed on trained weights, so retraining after a code change re-scores.
  static std::string parameter_hash(const fs::path& dir) {
    std::ifstream in(dir / "metrics.json");
    return json::parse(in).at("parameter_hash").get<std::string>();
  }
  static bool fresh(const fs::path& dir, const json& stamp) { return stamp_of(dir) == stamp.dump(); }
  static void mark(const fs::path& dir, const json& stamp) { std::ofstream(dir / ".stamp") << stamp.dump(); }

  fs::path work_;
  json budget_;
};

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i], 3);
  return s + "]";
}

using Spec = Benchmark::RunSpec;

std::vector<double> accuracies(Benchmark& b, Spec spec) {
  std::vector<double> out;
  for (auto s : b.seeds()) {
    spec.seed = s;
    out.push_back(b.accuracy(spec));
  }
  return out;
}

Outcome lambda_trend(Benchmark& b) {
  const auto rec = b.recognizer_metrics();
  const auto ev = b.evaluator_metrics();
  note("recognizer held-out token accuracy " + fmt(rec["heldout_token_accuracy"].get<double>()) +
       ", evaluator held-out sequence accuracy " + fmt(ev["heldout_sequence_accuracy"].get<double>()));
  const auto base = accuracies(b, Spec{0.0});
  const auto sfm = accuracies(b, Spec{50.0});
  int wins = 0;
  for (size_t i = 0; i < base.size(); ++i) wins += sfm[i] > base[i] ? 1 : 0;
  const double gain = mean(sfm) - mean(base);
  return {wins >= 2 && gain > 0, "lambda=50 " + list(sfm) + " vs lambda=0 " + list(base) + ": wins " +
                                     std::to_string(wins) + "/3, mean gain " + fmt(gain)};
}

Outcome norm_trend(Benchmark& b) {
  const auto l2l1 = accuracies(b, Spec{50.0, sg::Norm::kL2, sg::Norm::kL1});
  const auto l2l2 = accuracies(b, Spec{50.0, sg::Norm::kL2, sg::Norm::kL2});
  return {mean(l2l1) >= mean(l2l2),
          "PSM=L2/SFM=L1 mean " + fmt(mean(l2l1)) + " " + list(l2l1) + " vs PSM=L2/SFM=L2 mean " + fmt(mean(l2l2)) +
              " " + list(l2l2)};
}

Outcome filter_trend(Benchmark& b) {
  const auto all = accuracies(b, Spec{50.0});
  const auto wrong = accuracies(b, Spec{50.0, sg::Norm::kL2, sg::Norm::kL1, sg::AttentionFilter::kWrong});
  const auto correct = accuracies(b, Spec{50.0, sg::Norm::kL2, sg::Norm::kL1, sg::AttentionFilter::kCorrect});
  const double gap = mean(all) - mean(wrong);
  const double delta = std::abs(mean(correct) - mean(all));
  return {mean(wrong) < mean(all) && delta < gap,
          "all " + fmt(mean(all)) + ", wrong " + fmt(mean(wrong)) + ", correct " + fmt(mean(correct)) +
              "; all-wrong gap " + fmt(gap) + ", |correct-all| " + fmt(delta)};
}

Outcome ordering(Benchmark& b) {
  const double hr = b.baseline(sg::EvalSource::kHR);
  const double bic = b.baseline(sg::EvalSource::kBicubic);
  const auto sr = accuracies(b, Spec{50.0});
  bool ok = true;
  for (double a : sr) ok = ok && hr >= a && a >= bic;
  return {ok, "HR " + fmt(hr) + " >= SR(lambda=50) " + list(sr) + " >= bicubic LR " + fmt(bic)};
}

std::set<int> parse_criteria(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.insert(std::stoi(part));
    } else {
      for (int i = std::stoi(part.substr(0, dash)); i <= std::stoi(part.substr(dash + 1)); ++i) out.insert(i);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strokegestalt acceptance suite"};
  std::string which = "1-11";
  fs::path work = STROKEGESTALT_ACCEPTANCE_WORK;
  fs::path budget_path = STROKEGESTALT_ACCEPTANCE_BUDGET;
  app.add_option("--criteria", which, "e.g. 1-7 or 8,11");
  app.add_option("--work", work, "cache directory for the toy benchmark");
  app.add_option("--budget", budget_path, "benchmark budget JSON");
  CLI11_PARSE(app, argc, argv);

  sg::configure_runtime(true);
  const auto selected = parse_criteria(which);
  std::unique_ptr<Benchmark> bench;
  auto benchmark = [&]() -> Benchmark& {
    if (!bench) {
      std::ifstream in(budget_path);
      bench = std::make_unique<Benchmark>(work, json::parse(in));
    }
    return *bench;
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"loss identities", loss_identities},
      {"gradient correctness", gradient_check},
      {"shape/normalization suite", shapes_and_normalization},
      {"frozen-recognizer contract", frozen_recognizer},
      {"metric oracles", metric_oracles},
      {"codec completeness", codec_completeness},
      {"degradation generator", degradation_generator},
      {"lambda_SFM trend (50 vs 0)", [&] { return lambda_trend(benchmark()); }},
      {"loss-norm trend (L2/L1 vs L2/L2)", [&] { return norm_trend(benchmark()); }},
      {"attention-filter trend", [&] { return filter_trend(benchmark()); }},
      {"evaluator ordering HR >= SR >= LR", [&] { return ordering(benchmark()); }},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << id << "  " << criteria[i].first
              << ": " << o.detail << " [" << fmt(secs, 1) << " s]" << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
