#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "scnn/error.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

struct SgdHyperparams {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 50;
  std::size_t max_epochs = 30;
  double plateau_tolerance = 1e-4;  // early stop when epoch loss improves less than this
  std::size_t plateau_epochs = 3;   // ... for this many consecutive epochs
  double target_loss = 0.0;         // stop once epoch loss falls below; 0 disables
};

// Momentum SGD: v <- momentum*v + g; p <- p - lr*v.
// With momentum == 0 this is the plain update p - lr*g.
class SgdOptimizer {
 public:
  SgdOptimizer(double learning_rate, double momentum)
      : learning_rate_(learning_rate), momentum_(momentum) {
    if (learning_rate <= 0.0) throw ConfigError("learning rate must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
  }

  void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
    if (params.size() != grads.size()) {
      throw ShapeError("optimizer got " + std::to_string(grads.size()) + " gradients for " +
                       std::to_string(params.size()) + " parameters");
    }
    if (velocity_.empty()) {
      for (const Tensor* p : params) velocity_.emplace_back(p->shape());
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor& p = *params[i];
      const Tensor& g = grads[i];
      Tensor& v = velocity_[i];
      if (!p.same_shape(g)) {
        throw ShapeError("gradient shape " + g.shape_string() + " does not match parameter " +
                         p.shape_string());
      }
      for (std::size_t k = 0; k < p.size(); ++k) {
        v[k] = momentum_ * v[k] + g[k];
        p[k] -= learning_rate_ * v[k];
      }
    }
  }

  double learning_rate() const { return learning_rate_; }
  double momentum() const { return momentum_; }

 private:
  double learning_rate_;
  double momentum_;
  std::vector<Tensor> velocity_;
};

}  // namespace scnn
