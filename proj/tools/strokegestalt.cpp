// strokegestalt command-line interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "strokegestalt/dataset.hpp"
#include "strokegestalt/error.hpp"
#include "strokegestalt/evaluation.hpp"
#include "strokegestalt/image_ops.hpp"
#include "strokegestalt/recognizer.hpp"
#include "strokegestalt/report.hpp"
#include "strokegestalt/runtime.hpp"
#include "strokegestalt/sr_models.hpp"
#include "strokegestalt/stroke_codec.hpp"
#include "strokegestalt/training.hpp"

namespace fs = std::filesystem;
namespace sg = strokegestalt;
using nlohmann::json;

namespace {

void log_line(const std::string& msg) { std::cerr << msg << std::endl; }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw sg::Error("cannot open " + path.string());
  return json::parse(in);
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path) << j.dump(2) << '\n';
}

/// Architecture from a preset name or an explicit object; vocab and max_len
/// default to the values implied by the data.
sg::RecognizerConfig architecture_from(const json& j, int vocab, int max_len) {
  sg::RecognizerConfig c;
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "toy") c = sg::RecognizerConfig::toy(vocab, max_len);
    else if (name == "paper") c = sg::RecognizerConfig::paper(vocab, max_len);
    else if (name == "tiny") c = sg::RecognizerConfig::tiny(vocab, max_len);
    else throw sg::Error("unknown architecture preset: " + name);
    return c;
  }
  json full = j;
  if (!full.contains("vocab_size")) full["vocab_size"] = vocab;
  if (!full.contains("max_len")) full["max_len"] = max_len;
  return full.get<sg::RecognizerConfig>();
}

struct RecognizerJob {
  sg::RecognizerConfig arch;
  sg::RecognizerTrainOptions train;
};

RecognizerJob recognizer_job(const std::optional<fs::path>& config, int vocab, int max_len) {
  json j = config ? read_json(*config) : json::object();
  RecognizerJob job;
  job.arch = architecture_from(j.value("architecture", json("toy")), vocab, max_len);
  if (j.contains("train")) job.train = j.at("train").get<sg::RecognizerTrainOptions>();
  job.train.log = log_line;
  return job;
}

struct TrainArgs {
  std::optional<fs::path> config;
  std::string backbone;
  std::optional<double> lambda_sfm;
  std::string psm_norm, sfm_norm, filter;
  std::optional<uint64_t> seed;
  std::optional<int> steps, batch_size, checkpoint_every;
  std::optional<double> lr;

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON with optional \"sr\" and \"train\" objects");
    app->add_option("--backbone", backbone, "srcnn or tsrn")->check(CLI::IsMember({"srcnn", "tsrn"}));
    app->add_option("--lambda-sfm", lambda_sfm, "weight of the attention loss");
    app->add_option("--psm-norm", psm_norm)->check(CLI::IsMember({"l1", "l2"}));
    app->add_option("--sfm-norm", sfm_norm)->check(CLI::IsMember({"l1", "l2"}));
    app->add_option("--filter", filter, "attention filter")->check(CLI::IsMember({"all", "correct", "wrong"}));
    app->add_option("--seed", seed);
    app->add_option("--steps", steps);
    app->add_option("--batch-size", batch_size);
    app->add_option("--lr", lr);
    app->add_option("--checkpoint-every", checkpoint_every);
  }

  std::pair<sg::SRConfig, sg::TrainConfig> resolve() const {
    json j = config ? read_json(*config) : json::object();
    auto sr = j.value("sr", json::object()).get<sg::SRConfig>();
    auto tc = j.value("train", json::object()).get<sg::TrainConfig>();
    if (!backbone.empty()) sr.backbone = sg::backbone_from_string(backbone);
    if (lambda_sfm) tc.lambda_sfm = *lambda_sfm;
    if (!psm_norm.empty()) tc.psm_norm = sg::norm_from_string(psm_norm);
    if (!sfm_norm.empty()) tc.sfm_norm = sg::norm_from_string(sfm_norm);
    if (!filter.empty()) tc.attention_filter = sg::attention_filter_from_string(filter);
    if (seed) tc.seed = *seed;
    if (steps) tc.steps = *steps;
    if (batch_size) tc.batch_size = *batch_size;
    if (checkpoint_every) tc.checkpoint_every = *checkpoint_every;
    if (lr) tc.lr = *lr;
    sr.validate();
    tc.validate();
    return {sr, tc};
  }
};

struct SelectionArgs {
  std::optional<fs::path> evaluator;
  std::optional<fs::path> val_data;
  std::string val_split = "test";

  void add(CLI::App* app) {
    app->add_option("--evaluator", evaluator, "evaluator checkpoint for checkpoint selection");
    app->add_option("--val-data", val_data, "validation dataset scored at each checkpoint");
    app->add_option("--val-split", val_split, "split of --val-data to score");
  }
};

/// Trains one SR run; with an evaluator and validation data, every checkpoint
/// is scored and the best one is kept as sr_best.ckpt.
void run_train_sr(const fs::path& data, const fs::path& recognizer, const sg::SRConfig& sr, const sg::TrainConfig& tc,
                  const fs::path& out, const SelectionArgs& sel) {
  sg::TrainHooks hooks;
  hooks.log = log_line;
  const int every = std::max(1, tc.steps / 20);
  hooks.on_step = [every](const sg::TrainLogRow& r) {
    if (r.step % every == 0) {
      std::ostringstream os;
      os << "step " << r.step << " psm " << r.psm << " sfm " << r.sfm << " total " << r.total;
      log_line(os.str());
    }
  };
  std::optional<sg::Recognizer> evaluator;
  json selection = json::array();
  double best = -1.0;
  if (sel.evaluator && sel.val_data) {
    evaluator = sg::load_evaluator(sg::load_checkpoint(*sel.evaluator));
    const auto table_hash = sg::Dataset::open(data).stroke_table_hash();
    hooks.on_checkpoint = [&, table_hash](int step, sg::SRModel& model) {
      sg::EvalOptions opts;
      opts.split = sel.val_split;
      opts.keep_rows = false;
      const auto rep = sg::evaluate(*sel.val_data, *evaluator, sg::EvalSource::kSR, &model, opts);
      selection.push_back({{"step", step}, {"accuracy", rep.accuracy}});
      log_line("checkpoint " + std::to_string(step) + " validation accuracy " + std::to_string(rep.accuracy));
      if (rep.accuracy > best) {
        best = rep.accuracy;
        sg::save_checkpoint(out / "sr_best.ckpt",
                            sg::make_sr_checkpoint(model, table_hash, {{"step", step}, {"val_accuracy", rep.accuracy}}));
      }
      model->eval();
    };
  }
  const auto res = sg::train_sr_run(data, recognizer, sr, tc, out, hooks);
  if (!selection.empty()) write_json(out / "selection.json", {{"checkpoints", selection}, {"best_accuracy", best}});
  log_line("wrote " + res.checkpoint.string());
}

std::string lambda_dir_name(double lambda) {
  std::ostringstream os;
  os << "lambda_" << lambda;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stroke-focused text image super-resolution toolkit"};
  app.require_subcommand(1);
  bool deterministic = false;
  app.add_flag("--deterministic", deterministic, "same as STROKEGESTALT_DETERMINISTIC=1");

  // make-corpus
  auto* corpus_cmd = app.add_subcommand("make-corpus", "write a random lowercase alphanumeric word list");
  size_t corpus_n = 2500;
  uint64_t corpus_seed = 0;
  fs::path corpus_out;
  corpus_cmd->add_option("--n", corpus_n, "number of words");
  corpus_cmd->add_option("--seed", corpus_seed);
  corpus_cmd->add_option("--out", corpus_out)->required();

  // build-dataset
  auto* build_cmd = app.add_subcommand("build-dataset", "render and degrade a corpus into LR/HR pairs");
  fs::path build_corpus, build_table, build_out;
  std::optional<fs::path> build_degradation;
  uint64_t build_seed = 0;
  double build_test_fraction = 0.2;
  int build_max_len = 32;
  build_cmd->add_option("--corpus", build_corpus)->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--stroke-table", build_table)->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--out", build_out)->required();
  build_cmd->add_option("--seed", build_seed);
  build_cmd->add_option("--degradation", build_degradation, "degradation JSON")->check(CLI::ExistingFile);
  build_cmd->add_option("--test-fraction", build_test_fraction);
  build_cmd->add_option("--max-stroke-len", build_max_len);

  // pretrain-recognizer
  auto* pre_cmd = app.add_subcommand("pretrain-recognizer", "train the stroke-level recognizer");
  fs::path pre_data, pre_out;
  std::optional<fs::path> pre_config;
  pre_cmd->add_option("--data", pre_data)->required();
  pre_cmd->add_option("--config", pre_config, "JSON {architecture, train}")->check(CLI::ExistingFile);
  pre_cmd->add_option("--out", pre_out)->required();

  // train-evaluator
  auto* ev_train_cmd = app.add_subcommand("train-evaluator", "train the character-level evaluator");
  fs::path evt_data, evt_out;
  std::optional<fs::path> evt_config;
  ev_train_cmd->add_option("--data", evt_data)->required();
  ev_train_cmd->add_option("--config", evt_config, "JSON {architecture, train}")->check(CLI::ExistingFile);
  ev_train_cmd->add_option("--out", evt_out)->required();

  // train-sr
  auto* sr_cmd = app.add_subcommand("train-sr", "train an SR model against the frozen recognizer");
  fs::path sr_data, sr_rec, sr_out;
  TrainArgs sr_args;
  SelectionArgs sr_sel;
  sr_cmd->add_option("--data", sr_data)->required();
  sr_cmd->add_option("--recognizer", sr_rec)->required()->check(CLI::ExistingFile);
  sr_cmd->add_option("--out", sr_out)->required();
  sr_args.add(sr_cmd);
  sr_sel.add(sr_cmd);

  // sweep-lambda
  auto* sweep_cmd = app.add_subcommand("sweep-lambda", "train-sr over a grid of lambda values, then report");
  fs::path sw_data, sw_rec, sw_out;
  std::vector<double> sw_lambdas = sg::kLambdaSweep;
  std::optional<fs::path> sw_evaluator;
  TrainArgs sw_args;
  sweep_cmd->add_option("--data", sw_data)->required();
  sweep_cmd->add_option("--recognizer", sw_rec)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", sw_out)->required();
  sweep_cmd->add_option("--lambdas", sw_lambdas, "grid (default 0 0.1 1 10 50 100)");
  sweep_cmd->add_option("--evaluator", sw_evaluator, "score each run on the dataset's test split");
  sw_args.add(sweep_cmd);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score SR output (or a baseline) on a split");
  fs::path ev_data, ev_evaluator, ev_out;
  std::optional<fs::path> ev_sr;
  std::string ev_source, ev_split = "test";
  bool ev_rows = false;
  eval_cmd->add_option("--sr", ev_sr, "SR checkpoint; without it LR images are bicubic upsampled")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--source", ev_source, "force hr or bicubic input")->check(CLI::IsMember({"hr", "bicubic"}));
  eval_cmd->add_option("--data", ev_data)->required();
  eval_cmd->add_option("--evaluator", ev_evaluator)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", ev_out)->required();
  eval_cmd->add_option("--split", ev_split);
  eval_cmd->add_flag("--rows", ev_rows, "include per-sample rows");

  // infer
  auto* infer_cmd = app.add_subcommand("infer", "super-resolve one image");
  fs::path inf_sr, inf_in, inf_out;
  infer_cmd->add_option("--sr", inf_sr)->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--in", inf_in)->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--out", inf_out)->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "plots and summary over run directories");
  std::vector<fs::path> rep_runs;
  fs::path rep_out;
  report_cmd->add_option("--runs", rep_runs)->required();
  report_cmd->add_option("--out", rep_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    sg::configure_runtime(deterministic);

    if (*corpus_cmd) {
      const auto words = sg::make_random_corpus(corpus_n, corpus_seed);
      if (corpus_out.has_parent_path()) fs::create_directories(corpus_out.parent_path());
      std::ofstream out(corpus_out);
      for (const auto& w : words) out << w << '\n';
    } else if (*build_cmd) {
      sg::DatasetBuildOptions opts;
      opts.seed = build_seed;
      opts.test_fraction = build_test_fraction;
      opts.max_stroke_len = build_max_len;
      if (build_degradation) opts.degradation = read_json(*build_degradation).get<sg::DegradationSpec>();
      const auto manifest =
          sg::build_dataset(sg::read_corpus(build_corpus), sg::load_stroke_table(build_table), opts, build_out);
      log_line("wrote " + manifest.string());
    } else if (*pre_cmd) {
      const auto ds = sg::Dataset::open(pre_data);
      const auto job = recognizer_job(pre_config, ds.stroke_table().vocab_size(),
                                      ds.meta().value("max_stroke_len", 32));
      const auto ckpt = sg::pretrain_recognizer(pre_data, job.arch, job.train);
      fs::create_directories(pre_out);
      sg::save_checkpoint(pre_out / "recognizer.ckpt", ckpt);
      write_json(pre_out / "metrics.json", ckpt.metadata);
      log_line("wrote " + (pre_out / "recognizer.ckpt").string());
    } else if (*ev_train_cmd) {
      const auto ds = sg::Dataset::open(evt_data);
      size_t longest = 1;
      for (const auto& r : ds.rows()) longest = std::max(longest, r.text.size());
      const auto job = recognizer_job(evt_config, sg::CharVocabulary::vocab_size(), static_cast<int>(longest) + 1);
      const auto ckpt = sg::train_evaluator(evt_data, job.arch, job.train);
      fs::create_directories(evt_out);
      sg::save_checkpoint(evt_out / "evaluator.ckpt", ckpt);
      write_json(evt_out / "metrics.json", ckpt.metadata);
      log_line("wrote " + (evt_out / "evaluator.ckpt").string());
    } else if (*sr_cmd) {
      const auto [sr, tc] = sr_args.resolve();
      run_train_sr(sr_data, sr_rec, sr, tc, sr_out, sr_sel);
    } else if (*sweep_cmd) {
      const auto [sr, base] = sw_args.resolve();
      std::vector<fs::path> runs;
      for (double lambda : sw_lambdas) {
        auto tc = base;
        tc.lambda_sfm = lambda;
        const auto dir = sw_out / lambda_dir_name(lambda);
        log_line("== lambda " + std::to_string(lambda));
        run_train_sr(sw_data, sw_rec, sr, tc, dir, {});
        if (sw_evaluator) {
          sg::EvalOptions opts;
          opts.keep_rows = false;
          const auto rep = sg::evaluate_files(sw_data, *sw_evaluator, dir / "sr_final.ckpt", sg::EvalSource::kSR, opts);
          write_json(dir / "eval.json", rep);
          log_line("accuracy " + std::to_string(rep.accuracy));
        }
        runs.push_back(dir);
      }
      sg::build_report(runs, sw_out / "report");
    } else if (*eval_cmd) {
      sg::EvalSource source = ev_sr ? sg::EvalSource::kSR : sg::EvalSource::kBicubic;
      if (ev_source == "hr") source = sg::EvalSource::kHR;
      if (ev_source == "bicubic") source = sg::EvalSource::kBicubic;
      if (ev_source.size() && ev_sr) throw sg::Error("--source cannot be combined with --sr");
      sg::EvalOptions opts;
      opts.split = ev_split;
      opts.keep_rows = ev_rows;
      const auto rep = sg::evaluate_files(ev_data, ev_evaluator, ev_sr, source, opts);
      write_json(ev_out, rep);
      std::cout << "accuracy " << rep.accuracy << " psnr " << rep.psnr_mean << " ssim " << rep.ssim_mean << '\n';
    } else if (*infer_cmd) {
      auto model = sg::load_sr_model(sg::load_checkpoint(inf_sr));
      torch::NoGradGuard no_grad;
      const auto lr = sg::read_image(inf_in);
      const auto sr = sg::upsample(model, sg::image_to_tensor(lr).unsqueeze(0));
      if (inf_out.has_parent_path()) fs::create_directories(inf_out.parent_path());
      sg::write_image(inf_out, sg::tensor_to_image(sr[0]));
    } else if (*report_cmd) {
      const auto summary = sg::build_report(rep_runs, rep_out);
      std::cout << summary.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
