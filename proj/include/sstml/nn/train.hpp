#ifndef SSTML_NN_TRAIN_HPP
#define SSTML_NN_TRAIN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "sstml/nn/loss.hpp"
#include "sstml/nn/network.hpp"
#include "sstml/nn/optimizer.hpp"
#include "sstml/random.hpp"
#include "sstml/types.hpp"

namespace sstml::nn {

struct LossReport {
  int chunk_index = 0;
  double mean_loss = 0.0;
  int minibatch_count = 0;
  ClassWeights weights;
};

/// Batch tensor (B,3,S,S) from selected chunk images: pixels scaled to
/// {0,1} and replicated across the three channels.
template <typename T>
Tensor<T> make_batch(const ImageChunk& chunk, const int* indices, int count) {
  const int S = chunk.side;
  Tensor<T> batch({count, 3, S, S});
  const long long plane = static_cast<long long>(S) * S;
  for (int b = 0; b < count; ++b) {
    const std::uint8_t* img = chunk.image(static_cast<std::size_t>(indices[b]));
    T* dst = batch.ptr() + static_cast<long long>(b) * 3 * plane;
    for (long long i = 0; i < plane; ++i) dst[i] = static_cast<T>(img[i] / 255.0);
    std::copy(dst, dst + plane, dst + plane);
    std::copy(dst, dst + plane, dst + 2 * plane);
  }
  return batch;
}

/// One full pass over the chunk: shuffle once, ceil(N/batch_size)
/// minibatches (last possibly partial), class weights fixed from the whole
/// chunk's labels, one SGD step per minibatch.
template <typename T>
LossReport train_one_epoch(Network<T>& net, OptimizerState<T>& opt, const ImageChunk& chunk,
                           int batch_size, Rng& rng) {
  if (chunk.count == 0) throw std::invalid_argument("invalid-input: empty image chunk");
  if (batch_size < 1) throw std::invalid_argument("invalid-config: batch_size must be >= 1");
  const int n = static_cast<int>(chunk.count);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  LossReport report;
  report.chunk_index = chunk.chunk_index;
  report.weights = class_weights(chunk.labels);

  ForwardCache<T> cache;
  double loss_sum = 0.0;
  for (int start = 0; start < n; start += batch_size) {
    const int b = std::min(batch_size, n - start);
    Tensor<T> batch = make_batch<T>(chunk, order.data() + start, b);
    std::vector<int> labels(b);
    for (int i = 0; i < b; ++i) labels[i] = chunk.labels[static_cast<std::size_t>(order[start + i])];

    Tensor<T> logits = forward(net, batch, true, &cache);
    auto [loss, dlogits] = weighted_cross_entropy(logits, labels, report.weights);
    Network<T> grads = backward(net, cache, dlogits);
    sgd_momentum_step(opt, net, grads);

    loss_sum += loss;
    ++report.minibatch_count;
  }
  report.mean_loss = loss_sum / report.minibatch_count;
  return report;
}

struct Prediction {
  std::vector<int> labels;
  std::vector<std::array<double, 2>> scores;  // softmax rows
};

/// Eval-mode inference over the whole chunk; ties argmax toward class 0.
template <typename T>
Prediction predict(Network<T>& net, const ImageChunk& chunk, int batch_size = 32) {
  const int n = static_cast<int>(chunk.count);
  Prediction out;
  out.labels.resize(static_cast<std::size_t>(n));
  out.scores.resize(static_cast<std::size_t>(n));
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int start = 0; start < n; start += batch_size) {
    const int b = std::min(batch_size, n - start);
    Tensor<T> batch = make_batch<T>(chunk, idx.data() + start, b);
    Tensor<T> logits = forward(net, batch, false);
    for (int i = 0; i < b; ++i) {
      const double z0 = logits.data[2 * i];
      const double z1 = logits.data[2 * i + 1];
      const double m = std::max(z0, z1);
      const double lse = m + std::log(std::exp(z0 - m) + std::exp(z1 - m));
      const double p0 = std::exp(z0 - lse);
      out.scores[static_cast<std::size_t>(start + i)] = {p0, 1.0 - p0};
      out.labels[static_cast<std::size_t>(start + i)] = z1 > z0 ? 1 : 0;
    }
  }
  return out;
}

}  // namespace sstml::nn

#endif
