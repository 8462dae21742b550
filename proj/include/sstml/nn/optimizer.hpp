#ifndef SSTML_NN_OPTIMIZER_HPP
#define SSTML_NN_OPTIMIZER_HPP

#include <stdexcept>
#include <vector>

#include "sstml/nn/network.hpp"
#include "sstml/nn/tensor.hpp"

namespace sstml::nn {

template <typename T>
struct OptimizerState {
  double learning_rate = 0.001;
  double momentum = 0.9;
  std::vector<Tensor<T>> velocity;  // parameter traversal order

  OptimizerState() = default;
  OptimizerState(double lr, double mom, const Network<T>& net)
      : learning_rate(lr), momentum(mom) {
    if (lr <= 0.0) throw std::invalid_argument("invalid-config: learning_rate must be > 0");
    if (mom < 0.0 || mom >= 1.0)
      throw std::invalid_argument("invalid-config: momentum must be in [0,1)");
    for_each_param(const_cast<Network<T>&>(net),
                   [&](Tensor<T>& p) { velocity.emplace_back(p.shape); });
  }
};

/// v <- momentum * v + g;  w <- w - lr * v.
template <typename T>
void sgd_momentum_step(OptimizerState<T>& opt, Network<T>& net, const Network<T>& grads) {
  std::vector<Tensor<T>*> params, gs;
  for_each_param(net, [&](Tensor<T>& p) { params.push_back(&p); });
  for_each_param(const_cast<Network<T>&>(grads), [&](Tensor<T>& g) { gs.push_back(&g); });
  if (params.size() != gs.size() || params.size() != opt.velocity.size())
    throw std::invalid_argument("shape-error: optimizer/model/gradient mismatch");

  const T m = static_cast<T>(opt.momentum);
  const T lr = static_cast<T>(opt.learning_rate);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& w = *params[i];
    const Tensor<T>& g = *gs[i];
    Tensor<T>& v = opt.velocity[i];
    if (w.shape != g.shape || w.shape != v.shape)
      throw std::invalid_argument("shape-error: parameter " + std::to_string(i) +
                                  " expected " + shape_string(w.shape) + ", got gradient " +
                                  shape_string(g.shape));
    for (std::size_t j = 0; j < w.size(); ++j) {
      v.data[j] = m * v.data[j] + g.data[j];
      w.data[j] -= lr * v.data[j];
    }
  }
}

}  // namespace sstml::nn

#endif
