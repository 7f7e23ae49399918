#include "strokegestalt/optim.hpp"

#include <torch/torch.h>

#include "strokegestalt/error.hpp"

namespace strokegestalt {

void Optimizer::zero_grad() {
  for (auto& p : params_) {
    if (p.grad().defined()) {
      p.mutable_grad().detach_();
      p.mutable_grad().zero_();
    }
  }
}

Adadelta::Adadelta(std::vector<torch::Tensor> params, double lr, double rho, double eps)
    : Optimizer(std::move(params), lr), rho_(rho), eps_(eps) {
  for (const auto& p : params_) {
    square_avg_.push_back(torch::zeros_like(p));
    acc_delta_.push_back(torch::zeros_like(p));
  }
}

void Adadelta::step() {
  torch::NoGradGuard no_grad;
  for (size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (!p.grad().defined()) continue;
    const auto& g = p.grad();
    square_avg_[i].mul_(rho_).addcmul_(g, g, 1.0 - rho_);
    auto delta = (acc_delta_[i] + eps_).sqrt_().div_((square_avg_[i] + eps_).sqrt_()).mul_(g);
    acc_delta_[i].mul_(rho_).addcmul_(delta, delta, 1.0 - rho_);
    p.add_(delta, -lr_);
  }
}

Adam::Adam(std::vector<torch::Tensor> params, double lr)
    : Optimizer(params, lr),
      impl_(std::make_unique<torch::optim::Adam>(std::move(params), torch::optim::AdamOptions(lr))) {}

Adam::~Adam() = default;

void Adam::step() { impl_->step(); }

void Adam::set_lr(double lr) {
  lr_ = lr;
  for (auto& group : impl_->param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
}

std::unique_ptr<Optimizer> make_optimizer(const std::string& name, std::vector<torch::Tensor> params, double lr) {
  if (name == "adadelta") return std::make_unique<Adadelta>(std::move(params), lr);
  if (name == "adam") return std::make_unique<Adam>(std::move(params), lr);
  throw Error("unknown optimizer: " + name);
}

void clip_grad_norm(const std::vector<torch::Tensor>& params, double max_norm) {
  if (max_norm <= 0) return;
  torch::nn::utils::clip_grad_norm_(params, max_norm);
}

}  // namespace strokegestalt
