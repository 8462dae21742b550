#ifndef SSTML_NN_LOSS_HPP
#define SSTML_NN_LOSS_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sstml/nn/tensor.hpp"

namespace sstml::nn {

struct ClassWeights {
  std::array<double, 2> w{1.0, 1.0};
  bool degenerate = false;  // set when a class is absent from the labels
};

/// w_c = N / (2 * N_c); an absent class gets weight 0 and trips the flag.
inline ClassWeights class_weights(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("invalid-input: empty label vector");
  std::array<double, 2> counts{0.0, 0.0};
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("invalid-input: labels must be 0/1");
    counts[static_cast<std::size_t>(y)] += 1.0;
  }
  ClassWeights out;
  const double n = static_cast<double>(labels.size());
  for (int c = 0; c < 2; ++c) {
    if (counts[c] == 0.0) {
      out.w[c] = 0.0;
      out.degenerate = true;
    } else {
      out.w[c] = n / (2.0 * counts[c]);
    }
  }
  return out;
}

/// Weighted cross-entropy over a batch of 2-class logits:
/// loss = sum_i w_{y_i} * (-log softmax(z_i)[y_i]) / sum_i w_{y_i},
/// evaluated through log-sum-exp. Returns (loss, dloss/dlogits).
template <typename T>
std::pair<double, Tensor<T>> weighted_cross_entropy(const Tensor<T>& logits,
                                                    const std::vector<int>& labels,
                                                    const ClassWeights& weights) {
  if (logits.shape.size() != 2 || logits.shape[1] != 2)
    throw std::invalid_argument("shape-error: logits expected (B,2), got " +
                                shape_string(logits.shape));
  const int B = logits.shape[0];
  if (static_cast<int>(labels.size()) != B)
    throw std::invalid_argument("shape-error: labels length does not match batch");

  double weight_sum = 0.0;
  for (int y : labels) weight_sum += weights.w[static_cast<std::size_t>(y)];
  if (weight_sum <= 0.0)
    throw std::invalid_argument("degenerate-batch: all class weights are zero");

  Tensor<T> dlogits({B, 2});
  double loss = 0.0;
  for (int i = 0; i < B; ++i) {
    const double z0 = logits.data[2 * i];
    const double z1 = logits.data[2 * i + 1];
    const double m = std::max(z0, z1);
    const double lse = m + std::log(std::exp(z0 - m) + std::exp(z1 - m));
    const int y = labels[static_cast<std::size_t>(i)];
    const double wy = weights.w[static_cast<std::size_t>(y)];
    loss += wy * (lse - (y == 0 ? z0 : z1));
    const double p0 = std::exp(z0 - lse);
    const double p1 = std::exp(z1 - lse);
    const double scale = wy / weight_sum;
    dlogits.data[2 * i] = static_cast<T>(scale * (p0 - (y == 0 ? 1.0 : 0.0)));
    dlogits.data[2 * i + 1] = static_cast<T>(scale * (p1 - (y == 1 ? 1.0 : 0.0)));
  }
  return {loss / weight_sum, std::move(dlogits)};
}

}  // namespace sstml::nn

#endif
