#include "strokegestalt/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <torch/torch.h>

#include "strokegestalt/dataset.hpp"
#include "strokegestalt/error.hpp"
#include "strokegestalt/image_ops.hpp"
#include "strokegestalt/optim.hpp"
#include "strokegestalt/runtime.hpp"

namespace nn = torch::nn;

namespace strokegestalt {

// ---------------------------------------------------------------------------
// Config

void RecognizerConfig::validate() const {
  if (input_channels != 1 && input_channels != 3) throw Error("recognizer: input_channels must be 1 or 3");
  if (stem_channels.size() != 2) throw Error("recognizer: exactly two stem layers are required for the /4 grid");
  if (block_counts.size() != block_channels.size() || block_counts.empty()) {
    throw Error("recognizer: block_counts and block_channels must be non-empty and equally long");
  }
  if (heads <= 0 || model_dim % heads != 0) throw Error("recognizer: model_dim must be divisible by heads");
  if (model_dim % 4 != 0) throw Error("recognizer: model_dim must be divisible by 4 (2-D positions)");
  if (decoder_blocks < 1) throw Error("recognizer: need at least one decoder block");
  if (vocab_size < 3) throw Error("recognizer: vocab_size too small");
  if (max_len < 1) throw Error("recognizer: max_len must be positive");
}

RecognizerConfig RecognizerConfig::toy(int vocab_size, int max_len) {
  RecognizerConfig c;
  c.vocab_size = vocab_size;
  c.max_len = max_len;
  return c;
}

RecognizerConfig RecognizerConfig::paper(int vocab_size, int max_len) {
  RecognizerConfig c;
  c.stem_channels = {64, 128};
  c.block_counts = {3, 4, 6, 3};
  c.block_channels = {256, 256, 512, 1024};
  c.model_dim = 512;
  c.heads = 4;
  c.decoder_blocks = 1;
  c.ffn_dim = 2048;
  c.vocab_size = vocab_size;
  c.max_len = max_len;
  return c;
}

RecognizerConfig RecognizerConfig::tiny(int vocab_size, int max_len) {
  RecognizerConfig c;
  c.stem_channels = {2, 4};
  c.block_counts = {1};
  c.block_channels = {2};
  c.model_dim = 4;
  c.heads = 2;
  c.decoder_blocks = 1;
  c.ffn_dim = 4;
  c.vocab_size = vocab_size;
  c.max_len = max_len;
  return c;
}

void to_json(nlohmann::json& j, const RecognizerConfig& c) {
  j = nlohmann::json{{"input_channels", c.input_channels}, {"stem_channels", c.stem_channels},
                     {"block_counts", c.block_counts},     {"block_channels", c.block_channels},
                     {"model_dim", c.model_dim},           {"heads", c.heads},
                     {"decoder_blocks", c.decoder_blocks}, {"ffn_dim", c.ffn_dim},
                     {"vocab_size", c.vocab_size},         {"max_len", c.max_len}};
}

void from_json(const nlohmann::json& j, RecognizerConfig& c) {
  RecognizerConfig d;
  c.input_channels = j.value("input_channels", d.input_channels);
  c.stem_channels = j.value("stem_channels", d.stem_channels);
  c.block_counts = j.value("block_counts", d.block_counts);
  c.block_channels = j.value("block_channels", d.block_channels);
  c.model_dim = j.value("model_dim", d.model_dim);
  c.heads = j.value("heads", d.heads);
  c.decoder_blocks = j.value("decoder_blocks", d.decoder_blocks);
  c.ffn_dim = j.value("ffn_dim", d.ffn_dim);
  c.vocab_size = j.value("vocab_size", d.vocab_size);
  c.max_len = j.value("max_len", d.max_len);
  c.validate();
}

// ---------------------------------------------------------------------------
// Layers

MultiHeadAttentionImpl::MultiHeadAttentionImpl(int model_dim, int heads)
    : heads_(heads), head_dim_(model_dim / heads) {
  q_ = register_module("q", nn::Linear(model_dim, model_dim));
  k_ = register_module("k", nn::Linear(model_dim, model_dim));
  v_ = register_module("v", nn::Linear(model_dim, model_dim));
  out_ = register_module("out", nn::Linear(model_dim, model_dim));
}

std::pair<torch::Tensor, torch::Tensor> MultiHeadAttentionImpl::forward(const torch::Tensor& query,
                                                                        const torch::Tensor& memory,
                                                                        const torch::Tensor& mask) {
  const auto b = query.size(0);
  const auto t = query.size(1);
  const auto s = memory.size(1);
  auto split = [&](const torch::Tensor& x, int64_t len) {
    return x.view({b, len, heads_, head_dim_}).transpose(1, 2);  // [B,h,len,dh]
  };
  auto q = split(q_(query), t);
  auto k = split(k_(memory), s);
  auto v = split(v_(memory), s);
  auto scores = torch::matmul(q, k.transpose(-2, -1)) / std::sqrt(static_cast<double>(head_dim_));
  if (mask.defined()) scores = scores + mask;
  auto weights = torch::softmax(scores, -1);
  auto ctx = torch::matmul(weights, v).transpose(1, 2).contiguous().view({b, t, heads_ * head_dim_});
  return {out_(ctx), weights};
}

DecoderBlockImpl::DecoderBlockImpl(int model_dim, int heads, int ffn_dim) {
  self_attn_ = register_module("self_attn", MultiHeadAttention(model_dim, heads));
  cross_attn_ = register_module("cross_attn", MultiHeadAttention(model_dim, heads));
  ff1_ = register_module("ff1", nn::Linear(model_dim, ffn_dim));
  ff2_ = register_module("ff2", nn::Linear(ffn_dim, model_dim));
  norm1_ = register_module("norm1", nn::LayerNorm(nn::LayerNormOptions({model_dim})));
  norm2_ = register_module("norm2", nn::LayerNorm(nn::LayerNormOptions({model_dim})));
  norm3_ = register_module("norm3", nn::LayerNorm(nn::LayerNormOptions({model_dim})));
}

std::pair<torch::Tensor, torch::Tensor> DecoderBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& memory,
                                                                  const torch::Tensor& causal_mask) {
  auto h = norm1_(x + self_attn_(x, x, causal_mask).first);
  auto [cross, weights] = cross_attn_(h, memory);
  h = norm2_(h + cross);
  h = norm3_(h + ff2_(torch::relu(ff1_(h))));
  return {h, weights};
}

ResidualBlockImpl::ResidualBlockImpl(int in_channels, int out_channels) {
  auto conv = [](int i, int o) { return nn::Conv2d(nn::Conv2dOptions(i, o, 3).padding(1).bias(false)); };
  conv1_ = register_module("conv1", conv(in_channels, out_channels));
  bn1_ = register_module("bn1", nn::BatchNorm2d(out_channels));
  conv2_ = register_module("conv2", conv(out_channels, out_channels));
  bn2_ = register_module("bn2", nn::BatchNorm2d(out_channels));
  if (in_channels != out_channels) {
    shortcut_ = register_module(
        "shortcut", nn::Sequential(nn::Conv2d(nn::Conv2dOptions(in_channels, out_channels, 1).bias(false)),
                                   nn::BatchNorm2d(out_channels)));
  }
}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(bn1_(conv1_(x)));
  h = bn2_(conv2_(h));
  return torch::relu(h + (shortcut_ ? shortcut_->forward(x) : x));
}

// ---------------------------------------------------------------------------
// Recognizer

torch::Tensor sinusoid_table(int64_t length, int64_t dim, const torch::TensorOptions& opts) {
  auto pos = torch::arange(length, opts).unsqueeze(1);
  auto i = torch::arange(0, dim, 2, opts);
  auto freq = torch::exp(i * (-std::log(10000.0) / static_cast<double>(dim)));
  auto table = torch::zeros({length, dim}, opts);
  auto angles = pos * freq;
  table.index_put_({torch::indexing::Slice(), torch::indexing::Slice(0, torch::indexing::None, 2)}, torch::sin(angles));
  const int64_t n_cos = dim / 2;
  table.index_put_({torch::indexing::Slice(), torch::indexing::Slice(1, torch::indexing::None, 2)},
                   torch::cos(angles.index({torch::indexing::Slice(), torch::indexing::Slice(0, n_cos)})));
  return table;
}

RecognizerImpl::RecognizerImpl(RecognizerConfig config) : config_(std::move(config)) {
  config_.validate();
  stem_ = nn::Sequential();
  int in = config_.input_channels;
  for (int c : config_.stem_channels) {
    stem_->push_back(nn::Conv2d(nn::Conv2dOptions(in, c, 3).padding(1).bias(false)));
    stem_->push_back(nn::BatchNorm2d(c));
    stem_->push_back(nn::ReLU());
    stem_->push_back(nn::MaxPool2d(nn::MaxPool2dOptions(2).stride(2)));
    in = c;
  }
  register_module("stem", stem_);
  stages_ = nn::Sequential();
  for (size_t s = 0; s < config_.block_counts.size(); ++s) {
    for (int b = 0; b < config_.block_counts[s]; ++b) {
      stages_->push_back(ResidualBlock(in, config_.block_channels[s]));
      in = config_.block_channels[s];
    }
  }
  register_module("stages", stages_);
  feature_proj_ = register_module("feature_proj", nn::Linear(config_.d_feat(), config_.model_dim));
  embedding_ = register_module("embedding", nn::Embedding(config_.vocab_size, config_.model_dim));
  blocks_ = nn::ModuleList();
  for (int i = 0; i < config_.decoder_blocks; ++i) {
    blocks_->push_back(DecoderBlock(config_.model_dim, config_.heads, config_.ffn_dim));
  }
  register_module("blocks", blocks_);
  classifier_ = register_module("classifier", nn::Linear(config_.model_dim, config_.vocab_size));
}

torch::Tensor RecognizerImpl::encode(const torch::Tensor& images) {
  if (images.dim() != 4) throw ShapeError("encode: expected NCHW images");
  if (images.size(2) % 4 != 0 || images.size(3) % 4 != 0) {
    throw ShapeError("encode: image dims " + std::to_string(images.size(2)) + "x" + std::to_string(images.size(3)) +
                     " not divisible by 4");
  }
  auto x = images;
  if (config_.input_channels == 1) x = to_gray(x);
  if (x.size(1) != config_.input_channels) throw ShapeError("encode: channel mismatch");
  // Per-image standardization: text colour and background contrast vary wildly.
  auto mean = x.mean({1, 2, 3}, /*keepdim=*/true);
  auto std = (x - mean).pow(2).mean({1, 2, 3}, /*keepdim=*/true).add(1e-4).sqrt();
  x = (x - mean) / std;
  return stages_->forward(stem_->forward(x));
}

torch::Tensor RecognizerImpl::memory_positions(int64_t h, int64_t w, const torch::TensorOptions& opts) {
  const int64_t half = config_.model_dim / 2;
  auto ys = sinusoid_table(h, half, opts).unsqueeze(1).expand({h, w, half});
  auto xs = sinusoid_table(w, half, opts).unsqueeze(0).expand({h, w, half});
  return torch::cat({ys, xs}, -1).reshape({h * w, config_.model_dim});
}

DecodeOutput RecognizerImpl::decode(const torch::Tensor& features, const torch::Tensor& shifted) {
  if (features.dim() != 4 || features.size(1) != config_.d_feat()) throw ShapeError("decode: bad feature map");
  if (shifted.dim() != 2 || shifted.size(0) != features.size(0)) throw ShapeError("decode: bad shifted ids");
  const auto b = features.size(0);
  const auto h = features.size(2);
  const auto w = features.size(3);
  const auto t = shifted.size(1);
  if (t > config_.max_len) throw ShapeError("decode: sequence longer than max_len");
  const auto lo = shifted.min().item<int64_t>();
  const auto hi = shifted.max().item<int64_t>();
  if (lo < 0 || hi >= config_.vocab_size) throw ShapeError("decode: id out of vocab range");

  const auto opts = features.options();
  auto memory = feature_proj_(features.flatten(2).transpose(1, 2)) + memory_positions(h, w, opts);
  auto x = embedding_(shifted) + sinusoid_table(t, config_.model_dim, opts);
  auto causal = torch::full({t, t}, -std::numeric_limits<double>::infinity(), opts).triu(1);

  torch::Tensor weights;
  for (const auto& m : *blocks_) {
    std::tie(x, weights) = m->as<DecoderBlock>()->forward(x, memory, causal);
  }
  auto attn = weights.mean(1);
  attn = attn / attn.sum(-1, /*keepdim=*/true);
  return {classifier_(x), attn.view({b, t, h, w})};
}

void RecognizerImpl::freeze() {
  eval();
  for (auto& p : parameters()) p.set_requires_grad(false);
  frozen_ = true;
}

// ---------------------------------------------------------------------------
// Free functions

LabelBatch make_label_batch(const std::vector<std::vector<int>>& labels, int start_id) {
  if (labels.empty()) throw ShapeError("make_label_batch: no labels");
  size_t t = 0;
  for (const auto& l : labels) {
    if (l.empty()) throw ShapeError("make_label_batch: empty label");
    t = std::max(t, l.size());
  }
  const auto b = static_cast<int64_t>(labels.size());
  LabelBatch batch;
  batch.shifted = torch::zeros({b, static_cast<int64_t>(t)}, torch::kInt64);
  batch.targets = torch::full({b, static_cast<int64_t>(t)}, -1, torch::kInt64);
  batch.mask = torch::zeros({b, static_cast<int64_t>(t)}, torch::kFloat32);
  auto sa = batch.shifted.accessor<int64_t, 2>();
  auto ta = batch.targets.accessor<int64_t, 2>();
  auto ma = batch.mask.accessor<float, 2>();
  for (int64_t i = 0; i < b; ++i) {
    const auto& l = labels[i];
    const auto sh = shift_right(l, start_id);
    for (size_t k = 0; k < l.size(); ++k) {
      sa[i][k] = sh[k];
      ta[i][k] = l[k];
      ma[i][k] = 1.0f;
    }
    batch.lengths.push_back(static_cast<int>(l.size()));
  }
  return batch;
}

torch::Tensor encode_image(Recognizer& model, const torch::Tensor& images) {
  return model->encode(images.dim() == 3 ? images.unsqueeze(0) : images);
}

DecodeOutput decode_teacher_forced(Recognizer& model, const torch::Tensor& features, const torch::Tensor& shifted) {
  if (shifted.numel() > 0 && (shifted.select(1, 0) != model->config().start_id()).any().item<bool>()) {
    throw ShapeError("decode_teacher_forced: first id must be the start symbol");
  }
  return model->decode(features, shifted);
}

torch::Tensor extract_attention(Recognizer& model, const torch::Tensor& images, const LabelBatch& labels) {
  if (!model->frozen()) throw Error("extract_attention: recognizer must be frozen");
  for (int len : labels.lengths) {
    if (len > model->config().max_len) throw ShapeError("extract_attention: label exceeds max_len");
  }
  auto feats = model->encode(images);
  return model->decode(feats, labels.shifted.to(feats.device())).attention;
}

GreedyResult recognize_greedy(Recognizer& model, const torch::Tensor& images) {
  torch::NoGradGuard no_grad;
  const auto& cfg = model->config();
  auto feats = model->encode(images);
  const auto b = feats.size(0);
  std::vector<std::vector<int>> out(b);
  std::vector<bool> done(b, false);
  auto shifted = torch::full({b, 1}, cfg.start_id(), torch::kInt64);
  for (int step = 0; step < cfg.max_len; ++step) {
    auto logits = model->decode(feats, shifted).logits.select(1, step);
    // The start symbol is input-only; exclude it from the argmax.
    auto next = logits.narrow(1, 0, cfg.vocab_size - 1).argmax(1);
    bool all_done = true;
    for (int64_t i = 0; i < b; ++i) {
      if (done[i]) continue;
      const int id = static_cast<int>(next[i].item<int64_t>());
      out[i].push_back(id);
      if (id == 0) done[i] = true;
      all_done = all_done && done[i];
    }
    if (all_done) break;
    shifted = torch::cat({shifted, next.unsqueeze(1)}, 1);
  }
  GreedyResult result;
  result.ids = out;
  auto batch = make_label_batch(out, cfg.start_id());
  auto attn = model->decode(feats, batch.shifted).attention;
  for (int64_t i = 0; i < b; ++i) result.attention.push_back(attn[i].narrow(0, 0, batch.lengths[i]).clone());
  return result;
}

double teacher_forced_accuracy(const torch::Tensor& logits, const LabelBatch& labels) {
  auto pred = logits.argmax(-1);
  auto valid = labels.targets >= 0;
  const auto n = valid.sum().item<int64_t>();
  if (n == 0) return 0.0;
  return static_cast<double>((pred.eq(labels.targets) & valid).sum().item<int64_t>()) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Training

void to_json(nlohmann::json& j, const RecognizerTrainOptions& o) {
  j = nlohmann::json{{"optimizer", o.optimizer},   {"lr", o.lr},         {"lr_schedule", o.lr_schedule}, {"epochs", o.epochs},
                     {"batch_size", o.batch_size}, {"seed", o.seed},     {"grad_clip", o.grad_clip},
                     {"log_every", o.log_every},   {"target_accuracy", o.target_accuracy}, {"alternate_prob", o.alternate_prob}};
}

void from_json(const nlohmann::json& j, RecognizerTrainOptions& o) {
  RecognizerTrainOptions d;
  o.optimizer = j.value("optimizer", d.optimizer);
  o.lr = j.value("lr", d.lr);
  o.lr_schedule = j.value("lr_schedule", d.lr_schedule);
  if (o.lr_schedule != "constant" && o.lr_schedule != "cosine") {
    throw Error("unknown lr_schedule '" + o.lr_schedule + "'");
  }
  o.epochs = j.value("epochs", d.epochs);
  o.batch_size = j.value("batch_size", d.batch_size);
  o.seed = j.value("seed", d.seed);
  o.grad_clip = j.value("grad_clip", d.grad_clip);
  o.log_every = j.value("log_every", d.log_every);
  o.target_accuracy = j.value("target_accuracy", d.target_accuracy);
  o.alternate_prob = j.value("alternate_prob", d.alternate_prob);
  if (o.alternate_prob < 0.0 || o.alternate_prob > 1.0) throw Error("alternate_prob must lie in [0, 1]");
}

namespace {

struct HeldoutScore {
  double token_accuracy = 0.0;
  double sequence_accuracy = 0.0;
};

HeldoutScore score_heldout(Recognizer& model, const LabeledImages& data, int batch_size, bool with_greedy) {
  HeldoutScore s;
  const auto n = static_cast<int64_t>(data.labels.size());
  if (n == 0) return s;
  torch::NoGradGuard no_grad;
  const bool was_training = model->is_training();
  model->eval();
  int64_t correct_tokens = 0, total_tokens = 0, correct_seq = 0;
  for (int64_t start = 0; start < n; start += batch_size) {
    const auto len = std::min<int64_t>(batch_size, n - start);
    auto imgs = data.images.narrow(0, start, len);
    std::vector<std::vector<int>> labels(data.labels.begin() + start, data.labels.begin() + start + len);
    auto batch = make_label_batch(labels, model->config().start_id());
    auto out = model->decode(model->encode(imgs), batch.shifted);
    auto valid = batch.targets >= 0;
    correct_tokens += (out.logits.argmax(-1).eq(batch.targets) & valid).sum().item<int64_t>();
    total_tokens += valid.sum().item<int64_t>();
    if (with_greedy) {
      auto g = recognize_greedy(model, imgs);
      for (int64_t i = 0; i < len; ++i) correct_seq += g.ids[i] == labels[i] ? 1 : 0;
    }
  }
  if (was_training) model->train();
  s.token_accuracy = static_cast<double>(correct_tokens) / static_cast<double>(std::max<int64_t>(total_tokens, 1));
  s.sequence_accuracy = static_cast<double>(correct_seq) / static_cast<double>(n);
  return s;
}

}  // namespace

RecognizerTrainResult train_recognizer(Recognizer& model, const LabeledImages& train, const LabeledImages& heldout,
                                       const RecognizerTrainOptions& options) {
  if (model->frozen()) throw Error("train_recognizer: model is frozen");
  const auto n = static_cast<int64_t>(train.labels.size());
  if (n == 0 && options.epochs > 0) throw DataError("train_recognizer: empty training set");
  for (const auto& l : train.labels) {
    if (static_cast<int>(l.size()) > model->config().max_len) {
      throw DataError("train_recognizer: label longer than max_len " + std::to_string(model->config().max_len));
    }
  }
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };

  const bool mix = options.alternate_prob > 0.0 && train.alternates.defined();
  if (mix && !train.alternates.sizes().equals(train.images.sizes())) {
    throw ShapeError("train_recognizer: alternates must match images in shape");
  }

  RecognizerTrainResult result;
  auto opt = make_optimizer(options.optimizer, model->parameters(), options.lr);
  std::mt19937_64 rng(options.seed);
  // Separate stream so turning mixing on does not change the batch order.
  std::mt19937_64 mix_rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::bernoulli_distribution use_alternate(options.alternate_prob);
  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  model->train();
  double running = 0.0;
  int running_n = 0;
  const int64_t per_epoch = (n + options.batch_size - 1) / options.batch_size;
  const double total_steps = static_cast<double>(std::max<int64_t>(per_epoch * options.epochs, 1));

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int64_t start = 0; start < n; start += options.batch_size) {
      const auto len = std::min<int64_t>(options.batch_size, n - start);
      if (len < 2) continue;  // batch norm needs more than one sample
      std::vector<int64_t> idx(order.begin() + start, order.begin() + start + len);
      std::vector<std::vector<int>> labels;
      for (auto i : idx) labels.push_back(train.labels[i]);
      const auto index = torch::tensor(idx, torch::kInt64);
      auto imgs = train.images.index_select(0, index);
      if (mix) {
        std::vector<uint8_t> pick(idx.size());
        for (auto& p : pick) p = use_alternate(mix_rng) ? 1 : 0;
        auto sel = torch::tensor(pick, torch::kBool).view({-1, 1, 1, 1});
        imgs = torch::where(sel, train.alternates.index_select(0, index), imgs);
      }
      auto batch = make_label_batch(labels, model->config().start_id());

      if (options.lr_schedule == "cosine") {
        opt->set_lr(0.5 * options.lr * (1.0 + std::cos(M_PI * static_cast<double>(result.steps) / total_steps)));
      }
      opt->zero_grad();
      auto out = model->decode(model->encode(imgs), batch.shifted);
      auto loss = torch::nn::functional::cross_entropy(
          out.logits.reshape({-1, out.logits.size(-1)}), batch.targets.reshape({-1}),
          torch::nn::functional::CrossEntropyFuncOptions().ignore_index(-1));
      const double lv = loss.item<double>();
      if (!std::isfinite(lv)) {
        throw DivergenceError("recognizer loss became non-finite at step " + std::to_string(result.steps) +
                              " (epoch " + std::to_string(epoch) + "); try a lower learning rate");
      }
      loss.backward();
      clip_grad_norm(model->parameters(), options.grad_clip);
      opt->step();
      ++result.steps;
      result.final_loss = lv;
      running += lv;
      ++running_n;
      if (options.log_every > 0 && result.steps % options.log_every == 0) {
        const double mean = running / running_n;
        result.curve.push_back({{"step", result.steps}, {"epoch", epoch}, {"loss", mean}});
        std::ostringstream os;
        os << "step " << result.steps << " epoch " << epoch << " loss " << mean;
        log(os.str());
        running = 0.0;
        running_n = 0;
      }
    }
    if (options.target_accuracy > 0 && !heldout.labels.empty()) {
      const auto s = score_heldout(model, heldout, 64, false);
      result.curve.push_back({{"step", result.steps}, {"epoch", epoch}, {"heldout_token_accuracy", s.token_accuracy}});
      log("epoch " + std::to_string(epoch) + " heldout token accuracy " + std::to_string(s.token_accuracy));
      if (s.token_accuracy >= options.target_accuracy) break;
    }
  }

  model->eval();
  const auto s = score_heldout(model, heldout, 64, true);
  result.heldout_token_accuracy = s.token_accuracy;
  result.heldout_sequence_accuracy = s.sequence_accuracy;
  log("heldout token accuracy " + std::to_string(s.token_accuracy) + ", sequence accuracy " +
      std::to_string(s.sequence_accuracy));
  return result;
}

Checkpoint make_recognizer_checkpoint(Recognizer& model, const std::string& role, const std::string& table_hash,
                                      const nlohmann::json& metadata) {
  Checkpoint ckpt;
  ckpt.kind = "recognizer";
  ckpt.config = {{"role", role}, {"architecture", model->config()}, {"stroke_table_hash", table_hash}};
  ckpt.metadata = metadata;
  ckpt.tensors = module_state(*model);
  ckpt.metadata["parameter_hash"] = state_hash(ckpt.tensors);
  return ckpt;
}

Recognizer load_recognizer(const Checkpoint& ckpt, const std::string& expected_table_hash) {
  if (ckpt.kind != "recognizer") throw CheckpointError("expected a recognizer checkpoint, got " + ckpt.kind);
  const auto recorded = ckpt.config.value("stroke_table_hash", std::string{});
  if (!expected_table_hash.empty() && recorded != expected_table_hash) {
    throw CheckpointError("stroke table hash mismatch: checkpoint " + recorded + " vs dataset " + expected_table_hash);
  }
  Recognizer model(ckpt.config.at("architecture").get<RecognizerConfig>());
  load_module_state(*model, ckpt.tensors);
  model->eval();
  return model;
}

LabeledImages load_stroke_split(const std::filesystem::path& dataset, const std::string& split) {
  const auto ds = Dataset::open(dataset);
  LabeledImages out;
  std::vector<torch::Tensor> imgs;
  for (const auto& row : ds.rows(split)) {
    auto s = ds.load(row);
    imgs.push_back(image_to_tensor(strokegestalt::to_gray(s.hr_image)));
    out.labels.push_back(row.stroke_ids);
  }
  out.images = imgs.empty() ? torch::empty({0, 1, 0, 0}) : torch::stack(imgs);
  return out;
}

Checkpoint pretrain_recognizer(const std::filesystem::path& dataset, const RecognizerConfig& config,
                               const RecognizerTrainOptions& options) {
  const auto ds = Dataset::open(dataset);
  const auto table = ds.stroke_table();
  if (config.vocab_size != table.vocab_size()) {
    throw Error("recognizer vocab_size " + std::to_string(config.vocab_size) + " does not match stroke table (" +
                std::to_string(table.vocab_size()) + ")");
  }
  const auto train = load_stroke_split(dataset, "train");
  const auto test = load_stroke_split(dataset, "test");
  seed_torch(options.seed);
  Recognizer model(config);
  const auto r = train_recognizer(model, train, test, options);
  nlohmann::json meta{{"steps", r.steps},
                      {"final_loss", r.final_loss},
                      {"heldout_token_accuracy", r.heldout_token_accuracy},
                      {"heldout_sequence_accuracy", r.heldout_sequence_accuracy},
                      {"train_options", options},
                      {"curve", r.curve}};
  return make_recognizer_checkpoint(model, "stroke", table.hash(), meta);
}

}  // namespace strokegestalt
