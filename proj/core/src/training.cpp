#include "strokegestalt/training.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <torch/torch.h>

#include "strokegestalt/dataset.hpp"
#include "strokegestalt/error.hpp"
#include "strokegestalt/optim.hpp"
#include "strokegestalt/runtime.hpp"

namespace fs = std::filesystem;

namespace strokegestalt {

std::string to_string(AttentionFilter f) {
  switch (f) {
    case AttentionFilter::kAll: return "all";
    case AttentionFilter::kCorrect: return "correct";
    case AttentionFilter::kWrong: return "wrong";
  }
  return "all";
}

AttentionFilter attention_filter_from_string(const std::string& s) {
  if (s == "all") return AttentionFilter::kAll;
  if (s == "correct") return AttentionFilter::kCorrect;
  if (s == "wrong") return AttentionFilter::kWrong;
  throw Error("unknown attention filter: " + s);
}

void TrainConfig::validate() const {
  if (!(lambda_sfm >= 0.0)) throw Error("train: lambda_sfm must be >= 0");
  if (batch_size < 1) throw Error("train: batch_size must be >= 1");
  if (!(lr > 0.0)) throw Error("train: lr must be > 0");
  if (steps < 0) throw Error("train: steps must be >= 0");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"lambda_sfm", c.lambda_sfm},
                     {"psm_norm", to_string(c.psm_norm)},
                     {"sfm_norm", to_string(c.sfm_norm)},
                     {"batch_size", c.batch_size},
                     {"lr", c.lr},
                     {"steps", c.steps},
                     {"seed", c.seed},
                     {"attention_filter", to_string(c.attention_filter)},
                     {"checkpoint_every", c.checkpoint_every},
                     {"sfm_warn_threshold", c.sfm_warn_threshold}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  c.lambda_sfm = j.value("lambda_sfm", d.lambda_sfm);
  c.psm_norm = norm_from_string(j.value("psm_norm", to_string(d.psm_norm)));
  c.sfm_norm = norm_from_string(j.value("sfm_norm", to_string(d.sfm_norm)));
  c.batch_size = j.value("batch_size", d.batch_size);
  c.lr = j.value("lr", d.lr);
  c.steps = j.value("steps", d.steps);
  c.seed = j.value("seed", d.seed);
  c.attention_filter = attention_filter_from_string(j.value("attention_filter", to_string(d.attention_filter)));
  c.checkpoint_every = j.value("checkpoint_every", d.checkpoint_every);
  c.sfm_warn_threshold = j.value("sfm_warn_threshold", d.sfm_warn_threshold);
  c.validate();
}

void to_json(nlohmann::json& j, const TrainLogRow& r) {
  j = nlohmann::json{{"step", r.step}, {"psm", r.psm}, {"sfm", r.sfm}, {"total", r.total}, {"lr", r.lr}};
}

void from_json(const nlohmann::json& j, TrainLogRow& r) {
  j.at("step").get_to(r.step);
  j.at("psm").get_to(r.psm);
  j.at("sfm").get_to(r.sfm);
  j.at("total").get_to(r.total);
  j.at("lr").get_to(r.lr);
}

SRTrainingData load_sr_split(const fs::path& dataset, const std::string& split) {
  const auto ds = Dataset::open(dataset);
  SRTrainingData data;
  std::vector<torch::Tensor> lr, hr;
  for (const auto& row : ds.rows(split)) {
    auto s = ds.load(row);
    lr.push_back(image_to_tensor(s.lr_image));
    hr.push_back(image_to_tensor(s.hr_image));
    data.labels.push_back(row.stroke_ids);
  }
  if (lr.empty()) throw DataError("no samples in split " + split + " of " + dataset.string());
  data.lr = torch::stack(lr);
  data.hr = torch::stack(hr);
  return data;
}

std::vector<size_t> filter_attention_samples(const torch::Tensor& hr_images,
                                             const std::vector<std::vector<int>>& labels, Recognizer& recognizer,
                                             AttentionFilter mode, int batch_size) {
  const size_t n = labels.size();
  if (hr_images.size(0) != static_cast<int64_t>(n)) throw ShapeError("filter_attention_samples: count mismatch");
  std::vector<size_t> kept;
  if (mode == AttentionFilter::kAll) {
    kept.resize(n);
    std::iota(kept.begin(), kept.end(), size_t{0});
    return kept;
  }
  for (size_t start = 0; start < n; start += static_cast<size_t>(batch_size)) {
    const size_t len = std::min(static_cast<size_t>(batch_size), n - start);
    auto g = recognize_greedy(recognizer, hr_images.narrow(0, static_cast<int64_t>(start), static_cast<int64_t>(len)));
    for (size_t i = 0; i < len; ++i) {
      const bool correct = g.ids[i] == labels[start + i];
      if (correct == (mode == AttentionFilter::kCorrect)) kept.push_back(start + i);
    }
  }
  return kept;
}

namespace {

/// HR attention maps never change (frozen recognizer, fixed images), so they
/// are computed once per sample.
class HrAttentionCache {
 public:
  HrAttentionCache(Recognizer& rec, const SRTrainingData& data) : rec_(rec), data_(data), maps_(data.size()) {}

  torch::Tensor batch(const std::vector<int64_t>& idx, int64_t t) {
    std::vector<int64_t> missing;
    for (auto i : idx) {
      if (!maps_[i].defined()) missing.push_back(i);
    }
    if (!missing.empty()) {
      torch::NoGradGuard no_grad;
      std::vector<std::vector<int>> labels;
      for (auto i : missing) labels.push_back(data_.labels[i]);
      auto lb = make_label_batch(labels, rec_->config().start_id());
      auto attn = extract_attention(rec_, data_.hr.index_select(0, torch::tensor(missing)), lb);
      for (size_t k = 0; k < missing.size(); ++k) {
        maps_[missing[k]] = attn[static_cast<int64_t>(k)].narrow(0, 0, lb.lengths[k]).clone();
      }
    }
    std::vector<torch::Tensor> out;
    for (auto i : idx) {
      auto m = maps_[i];
      const auto pad = t - m.size(0);
      out.push_back(pad > 0 ? torch::cat({m, torch::zeros({pad, m.size(1), m.size(2)}, m.options())}) : m);
    }
    return torch::stack(out);
  }

 private:
  Recognizer& rec_;
  const SRTrainingData& data_;
  std::vector<torch::Tensor> maps_;
};

}  // namespace

TrainSRResult train_sr(SRModel& model, Recognizer& recognizer, const SRTrainingData& data, const TrainConfig& config,
                       const TrainHooks& hooks) {
  config.validate();
  auto log = [&](const std::string& msg) {
    if (hooks.log) hooks.log(msg);
  };
  const auto n = static_cast<int64_t>(data.size());
  if (n == 0) throw DataError("train_sr: empty training set");
  if (data.hr.size(2) != 2 * data.lr.size(2) || data.hr.size(3) != 2 * data.lr.size(3)) {
    throw ShapeError("train_sr: HR must be exactly 2x LR");
  }
  for (const auto& l : data.labels) {
    if (static_cast<int>(l.size()) > recognizer->config().max_len) {
      throw DataError("train_sr: stroke label exceeds recognizer max_len");
    }
  }

  recognizer->freeze();
  TrainSRResult result;
  result.recognizer_hash_before = parameter_hash(*recognizer);

  // Per-sample weight on the attention term.
  const auto kept = filter_attention_samples(data.hr, data.labels, recognizer, config.attention_filter);
  std::vector<float> sfm_weight(n, 0.0f);
  for (auto i : kept) sfm_weight[i] = 1.0f;
  result.sfm_samples = kept.size();
  log("attention filter '" + to_string(config.attention_filter) + "' keeps " + std::to_string(kept.size()) + "/" +
      std::to_string(n) + " samples");

  HrAttentionCache hr_cache(recognizer, data);
  model->train();
  Adam opt(model->parameters(), config.lr);
  std::mt19937_64 rng(config.seed);
  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  int64_t cursor = n;
  double sfm_window = 0.0;
  int sfm_window_n = 0;
  bool warned = false;

  for (int step = 1; step <= config.steps; ++step) {
    std::vector<int64_t> idx;
    while (static_cast<int>(idx.size()) < std::min<int64_t>(config.batch_size, n)) {
      if (cursor >= n) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      idx.push_back(order[cursor++]);
    }
    auto index = torch::tensor(idx, torch::kInt64);
    auto lr_b = data.lr.index_select(0, index);
    auto hr_b = data.hr.index_select(0, index);
    std::vector<std::vector<int>> labels;
    std::vector<float> weights;
    for (auto i : idx) {
      labels.push_back(data.labels[i]);
      weights.push_back(sfm_weight[i]);
    }
    auto lb = make_label_batch(labels, recognizer->config().start_id());
    auto step_mask = lb.mask * torch::tensor(weights).unsqueeze(1);
    auto attn_hr = hr_cache.batch(idx, lb.shifted.size(1));

    opt.zero_grad();
    auto sr = model->forward(lr_b);
    auto psm = psm_loss(sr, hr_b, config.psm_norm);
    torch::Tensor sfm;
    if (config.lambda_sfm > 0.0) {
      sfm = sfm_loss(extract_attention(recognizer, sr, lb), attn_hr, config.sfm_norm, step_mask);
    } else {
      torch::NoGradGuard no_grad;
      sfm = sfm_loss(extract_attention(recognizer, sr.detach(), lb), attn_hr, config.sfm_norm, step_mask);
    }
    auto total = total_loss(psm, sfm, config.lambda_sfm);

    TrainLogRow row{step, psm.item<double>(), sfm.item<double>(), total.item<double>(), config.lr};
    if (!std::isfinite(row.total) || !std::isfinite(row.sfm)) {
      throw DivergenceError("SR training loss became non-finite at step " + std::to_string(step) + " (psm " +
                            std::to_string(row.psm) + ", sfm " + std::to_string(row.sfm) + ")");
    }
    total.backward();
    opt.step();

    result.log.push_back(row);
    if (hooks.on_step) hooks.on_step(row);

    sfm_window += row.sfm;
    if (++sfm_window_n == 50) {
      const double mean = sfm_window / sfm_window_n;
      if (mean > config.sfm_warn_threshold && !warned) {
        std::ostringstream os;
        os << "mean sfm " << mean << " above " << config.sfm_warn_threshold
           << " at step " << step << "; attention maps may be misaligned";
        result.warnings.push_back(os.str());
        log("warning: " + os.str());
        warned = true;
      }
      sfm_window = 0.0;
      sfm_window_n = 0;
    }
    if (config.checkpoint_every > 0 && step % config.checkpoint_every == 0 && step != config.steps &&
        hooks.on_checkpoint) {
      model->eval();
      hooks.on_checkpoint(step, model);
      model->train();
    }
  }
  model->eval();
  if (hooks.on_checkpoint) hooks.on_checkpoint(config.steps, model);

  result.recognizer_hash_after = parameter_hash(*recognizer);
  if (result.recognizer_hash_after != result.recognizer_hash_before) {
    throw Error("recognizer parameters changed during SR training");
  }
  return result;
}

SRRunOutputs train_sr_run(const fs::path& dataset, const fs::path& recognizer_ckpt, const SRConfig& sr_config,
                          const TrainConfig& config, const fs::path& run_dir, const TrainHooks& hooks) {
  const auto ds = Dataset::open(dataset);
  auto rec = load_recognizer(load_checkpoint(recognizer_ckpt), ds.stroke_table_hash());
  auto data = load_sr_split(dataset, "train");

  fs::create_directories(run_dir);
  nlohmann::json snapshot{{"dataset", fs::absolute(dataset).string()},
                          {"recognizer", fs::absolute(recognizer_ckpt).string()},
                          {"sr", sr_config},
                          {"train", config},
                          {"seed", config.seed},
                          {"stroke_table_hash", ds.stroke_table_hash()}};
  std::ofstream(run_dir / "config.json") << snapshot.dump(2) << '\n';

  SRRunOutputs out;
  out.log = run_dir / "train_log.jsonl";
  out.checkpoint = run_dir / "sr_final.ckpt";
  std::ofstream log_file(out.log);

  TrainHooks wrapped = hooks;
  wrapped.on_step = [&](const TrainLogRow& r) {
    log_file << nlohmann::json(r).dump() << '\n';
    if (hooks.on_step) hooks.on_step(r);
  };
  wrapped.on_checkpoint = [&](int step, SRModel& m) {
    nlohmann::json meta{{"step", step}, {"train", config}};
    const auto path = step == config.steps ? out.checkpoint : run_dir / ("sr_step" + std::to_string(step) + ".ckpt");
    save_checkpoint(path, make_sr_checkpoint(m, ds.stroke_table_hash(), meta));
    if (hooks.on_checkpoint) hooks.on_checkpoint(step, m);
  };

  seed_torch(config.seed);
  SRModel model(sr_config);
  out.result = train_sr(model, rec, data, config, wrapped);
  nlohmann::json summary{{"recognizer_hash_before", out.result.recognizer_hash_before},
                         {"recognizer_hash_after", out.result.recognizer_hash_after},
                         {"sfm_samples", out.result.sfm_samples},
                         {"warnings", out.result.warnings},
                         {"final", out.result.log.empty() ? nlohmann::json() : nlohmann::json(out.result.log.back())}};
  std::ofstream(run_dir / "summary.json") << summary.dump(2) << '\n';
  return out;
}

}  // namespace strokegestalt
