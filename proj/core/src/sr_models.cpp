#include "strokegestalt/sr_models.hpp"

#include <torch/torch.h>

#include "strokegestalt/error.hpp"

namespace nn = torch::nn;
namespace F = torch::nn::functional;

namespace strokegestalt {

std::string to_string(Backbone b) { return b == Backbone::kSrcnn ? "srcnn" : "tsrn"; }

Backbone backbone_from_string(const std::string& s) {
  if (s == "srcnn") return Backbone::kSrcnn;
  if (s == "tsrn") return Backbone::kTsrn;
  throw Error("unknown backbone: " + s);
}

void SRConfig::validate() const {
  if (scale != 2) throw Error("sr: only scale 2 is supported");
  if (channels < 2) throw Error("sr: channels must be >= 2");
  if (backbone == Backbone::kTsrn && (num_blocks < 1 || channels % 2 != 0)) {
    throw Error("sr: tsrn needs >= 1 block and an even channel count");
  }
  if (srcnn_kernels.size() != 3) throw Error("sr: srcnn needs three kernel sizes");
  for (int k : srcnn_kernels) {
    if (k < 1 || k % 2 == 0) throw Error("sr: srcnn kernels must be odd");
  }
}

SRConfig SRConfig::tiny() {
  SRConfig c;
  c.backbone = Backbone::kSrcnn;
  c.channels = 2;
  c.srcnn_kernels = {3, 1, 3};
  c.stn_channels = 1;
  return c;
}

void to_json(nlohmann::json& j, const SRConfig& c) {
  j = nlohmann::json{{"backbone", to_string(c.backbone)}, {"channels", c.channels},
                     {"num_blocks", c.num_blocks},        {"use_stn", c.use_stn},
                     {"scale", c.scale},                  {"srcnn_kernels", c.srcnn_kernels},
                     {"stn_channels", c.stn_channels},    {"residual_base", c.residual_base}};
}

void from_json(const nlohmann::json& j, SRConfig& c) {
  SRConfig d;
  c.backbone = backbone_from_string(j.value("backbone", to_string(d.backbone)));
  c.channels = j.value("channels", d.channels);
  c.num_blocks = j.value("num_blocks", d.num_blocks);
  c.use_stn = j.value("use_stn", d.use_stn);
  c.scale = j.value("scale", d.scale);
  c.srcnn_kernels = j.value("srcnn_kernels", d.srcnn_kernels);
  c.stn_channels = j.value("stn_channels", d.stn_channels);
  c.residual_base = j.value("residual_base", d.residual_base);
  c.validate();
}

torch::Tensor pixel_shuffle(const torch::Tensor& feat, int r) {
  if (feat.dim() != 4) throw ShapeError("pixel_shuffle: expected NCHW input");
  const auto b = feat.size(0), c = feat.size(1), h = feat.size(2), w = feat.size(3);
  if (r < 1 || c % (r * r) != 0) {
    throw ShapeError("pixel_shuffle: " + std::to_string(c) + " channels not divisible by r^2 = " +
                     std::to_string(r * r));
  }
  const auto oc = c / (r * r);
  return feat.reshape({b, oc, r, r, h, w}).permute({0, 1, 4, 2, 5, 3}).reshape({b, oc, h * r, w * r});
}

// ---------------------------------------------------------------------------

StnImpl::StnImpl(int channels) {
  conv1_ = register_module("conv1", nn::Conv2d(nn::Conv2dOptions(3, channels, 3).padding(1)));
  conv2_ = register_module("conv2", nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).padding(1)));
  fc_ = register_module("fc", nn::Linear(channels * 2 * 4, 6));
  torch::NoGradGuard no_grad;
  fc_->weight.zero_();
  fc_->bias.copy_(torch::tensor({1.0, 0.0, 0.0, 0.0, 1.0, 0.0}));
}

torch::Tensor StnImpl::theta(const torch::Tensor& x) {
  auto h = F::max_pool2d(torch::relu(conv1_(x)), F::MaxPool2dFuncOptions(2));
  h = torch::relu(conv2_(h));
  h = F::adaptive_avg_pool2d(h, F::AdaptiveAvgPool2dFuncOptions({2, 4}));
  return fc_(h.flatten(1)).view({-1, 2, 3});
}

torch::Tensor StnImpl::forward(const torch::Tensor& x) {
  auto grid = F::affine_grid(theta(x), x.sizes(), /*align_corners=*/false);
  return F::grid_sample(x, grid,
                        F::GridSampleFuncOptions().mode(torch::kBilinear).padding_mode(torch::kBorder).align_corners(false));
}

SequentialResidualBlockImpl::SequentialResidualBlockImpl(int channels) {
  conv_ = register_module("conv", nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).padding(1)));
  act_ = register_module("act", nn::PReLU());
  const int hidden = channels / 2;
  row_gru_ = register_module("row_gru", nn::GRU(nn::GRUOptions(channels, hidden).batch_first(true).bidirectional(true)));
  col_gru_ = register_module("col_gru", nn::GRU(nn::GRUOptions(channels, hidden).batch_first(true).bidirectional(true)));
}

torch::Tensor SequentialResidualBlockImpl::forward(const torch::Tensor& x) {
  const auto b = x.size(0), c = x.size(1), h = x.size(2), w = x.size(3);
  auto y = act_(conv_(x));
  // Rows: sequences along W, one per (batch, row).
  auto rows = y.permute({0, 2, 3, 1}).reshape({b * h, w, c});
  auto r = std::get<0>(row_gru_(rows)).reshape({b, h, w, c});
  y = y + r.permute({0, 3, 1, 2});
  // Columns: sequences along H.
  auto cols = y.permute({0, 3, 2, 1}).reshape({b * w, h, c});
  auto k = std::get<0>(col_gru_(cols)).reshape({b, w, h, c});
  y = y + k.permute({0, 3, 2, 1});
  return x + y;
}

SRModelImpl::SRModelImpl(SRConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.use_stn) stn_ = register_module("stn", Stn(config_.stn_channels));
  const int r2 = config_.scale * config_.scale;
  const int c = config_.channels;
  body_ = nn::ModuleList();
  if (config_.backbone == Backbone::kSrcnn) {
    const auto& k = config_.srcnn_kernels;
    const int mid = std::max(1, c / 2);
    head_ = register_module("head", nn::Conv2d(nn::Conv2dOptions(3, c, k[0]).padding(k[0] / 2)));
    body_->push_back(nn::Conv2d(nn::Conv2dOptions(c, mid, k[1]).padding(k[1] / 2)));
    tail_ = register_module("tail", nn::Conv2d(nn::Conv2dOptions(mid, 3 * r2, k[2]).padding(k[2] / 2)));
  } else {
    head_ = register_module("head", nn::Conv2d(nn::Conv2dOptions(3, c, 9).padding(4)));
    for (int i = 0; i < config_.num_blocks; ++i) body_->push_back(SequentialResidualBlock(c));
    tail_ = register_module("tail", nn::Conv2d(nn::Conv2dOptions(c, 3 * r2, 3).padding(1)));
  }
  register_module("body", body_);
  if (!config_.residual_base) {
    torch::NoGradGuard no_grad;
    tail_->bias.fill_(0.5);  // start mid-range so the clamp passes gradients
  }
}

torch::Tensor SRModelImpl::rectify(const torch::Tensor& lr) { return stn_ ? stn_->forward(lr) : lr; }

torch::Tensor SRModelImpl::forward(const torch::Tensor& lr) {
  auto x = rectify(lr);
  torch::Tensor h;
  if (config_.backbone == Backbone::kSrcnn) {
    h = torch::relu(head_(x));
    h = torch::relu(body_[0]->as<nn::Conv2d>()->forward(h));
  } else {
    h = torch::relu(head_(x));
    for (const auto& m : *body_) h = m->as<SequentialResidualBlock>()->forward(h);
  }
  auto out = pixel_shuffle(tail_(h), config_.scale);
  if (config_.residual_base) {
    out = out + F::interpolate(x, F::InterpolateFuncOptions()
                                      .scale_factor(std::vector<double>{double(config_.scale), double(config_.scale)})
                                      .mode(torch::kBicubic)
                                      .align_corners(false));
  }
  return out.clamp(0.0, 1.0);
}

torch::Tensor rectify(SRModel& model, const torch::Tensor& image) { return model->rectify(image); }

torch::Tensor upsample(SRModel& model, const torch::Tensor& lr) {
  if (lr.dim() != 4 || lr.size(1) != 3) throw ShapeError("upsample: expected [B,3,H,W] input");
  if (lr.size(2) % 4 != 0 || lr.size(3) % 4 != 0) throw ShapeError("upsample: LR dims must be divisible by 4");
  if (lr.min().item<double>() < 0.0 || lr.max().item<double>() > 1.0) {
    throw ShapeError("upsample: input values outside [0,1]");
  }
  return model->forward(lr);
}

Checkpoint make_sr_checkpoint(SRModel& model, const std::string& table_hash, const nlohmann::json& metadata) {
  Checkpoint ckpt;
  ckpt.kind = "sr";
  ckpt.config = {{"architecture", model->config()}, {"backbone", to_string(model->config().backbone)},
                 {"stroke_table_hash", table_hash}};
  ckpt.metadata = metadata;
  ckpt.tensors = module_state(*model);
  ckpt.metadata["parameter_hash"] = state_hash(ckpt.tensors);
  return ckpt;
}

SRModel load_sr_model(const Checkpoint& ckpt) {
  if (ckpt.kind != "sr") throw CheckpointError("expected an sr checkpoint, got " + ckpt.kind);
  SRModel model(ckpt.config.at("architecture").get<SRConfig>());
  load_module_state(*model, ckpt.tensors);
  model->eval();
  return model;
}

}  // namespace strokegestalt
