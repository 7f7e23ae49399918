#pragma once

#include <memory>
#include <string>
#include <vector>

#include <torch/types.h>

namespace torch::optim {
class Adam;
}

namespace strokegestalt {

/// Minimal optimizer interface over a fixed parameter list.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step() = 0;
  void zero_grad();
  double lr() const { return lr_; }
  virtual void set_lr(double lr) { lr_ = lr; }

 protected:
  Optimizer(std::vector<torch::Tensor> params, double lr) : params_(std::move(params)), lr_(lr) {}
  std::vector<torch::Tensor> params_;
  double lr_;
};

/// Adadelta (rho = 0.9, eps = 1e-6); absent from libtorch's C++ optimizers.
class Adadelta : public Optimizer {
 public:
  Adadelta(std::vector<torch::Tensor> params, double lr = 1.0, double rho = 0.9, double eps = 1e-6);
  void step() override;

 private:
  double rho_, eps_;
  std::vector<torch::Tensor> square_avg_, acc_delta_;
};

/// torch::optim::Adam behind the common interface; default betas.
class Adam : public Optimizer {
 public:
  Adam(std::vector<torch::Tensor> params, double lr = 1e-4);
  ~Adam() override;
  void step() override;
  void set_lr(double lr) override;

 private:
  std::unique_ptr<torch::optim::Adam> impl_;
};

std::unique_ptr<Optimizer> make_optimizer(const std::string& name, std::vector<torch::Tensor> params, double lr);

/// Scales gradients so their global L2 norm is at most max_norm.
void clip_grad_norm(const std::vector<torch::Tensor>& params, double max_norm);

}  // namespace strokegestalt
