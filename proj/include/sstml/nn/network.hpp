#ifndef SSTML_NN_NETWORK_HPP
#define SSTML_NN_NETWORK_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sstml/nn/layers.hpp"
#include "sstml/nn/tensor.hpp"
#include "sstml/random.hpp"

namespace sstml::nn {

enum class Normalization { batch, none };
enum class Variant { compact, resnet18 };

struct NetworkConfig {
  int input_side = 50;
  int stem_channels = 16;
  std::vector<int> stage_channels{16, 32, 64};
  int blocks_per_stage = 2;
  int n_classes = 2;
  Normalization normalization = Normalization::batch;
  Variant variant = Variant::compact;

  void validate() const {
    if (input_side < 16) throw std::invalid_argument("invalid-config: input_side must be >= 16");
    if (stem_channels < 1 || blocks_per_stage < 1 || n_classes < 2 || stage_channels.empty())
      throw std::invalid_argument("invalid-config: bad network dimensions");
    for (std::size_t i = 1; i < stage_channels.size(); ++i)
      if (stage_channels[i] < stage_channels[i - 1])
        throw std::invalid_argument("invalid-config: stage_channels must be nondecreasing");
  }

  static NetworkConfig compact(int input_side = 50) {
    NetworkConfig c;
    c.input_side = input_side;
    return c;
  }

  static NetworkConfig resnet18(int input_side = 50) {
    NetworkConfig c;
    c.input_side = input_side;
    c.stem_channels = 64;
    c.stage_channels = {64, 128, 256, 512};
    c.blocks_per_stage = 2;
    c.variant = Variant::resnet18;
    return c;
  }
};

/// Two 3x3 convs with identity (or 1x1-projected) shortcut.
template <typename T>
struct ResidualBlock {
  ConvLayer<T> conv1, conv2;
  BatchNormLayer<T> bn1, bn2;
  bool has_proj = false;
  ConvLayer<T> proj;
  BatchNormLayer<T> proj_bn;
};

template <typename T>
struct Network {
  NetworkConfig config;
  ConvLayer<T> stem;
  BatchNormLayer<T> stem_bn;
  std::vector<ResidualBlock<T>> blocks;
  LinearLayer<T> head;

  bool use_norm() const { return config.normalization == Normalization::batch; }
  bool has_maxpool() const { return config.variant == Variant::resnet18; }
};

// --- parameter traversal (fixed order: stem, blocks, head) ---

template <typename T, typename F>
void for_each_param(Network<T>& net, F&& f) {
  const bool norm = net.use_norm();
  auto bn = [&](BatchNormLayer<T>& l) {
    if (!norm) return;
    f(l.gamma);
    f(l.beta);
  };
  f(net.stem.w);
  bn(net.stem_bn);
  for (auto& block : net.blocks) {
    f(block.conv1.w);
    bn(block.bn1);
    f(block.conv2.w);
    bn(block.bn2);
    if (block.has_proj) {
      f(block.proj.w);
      bn(block.proj_bn);
    }
  }
  f(net.head.w);
  f(net.head.b);
}

template <typename T, typename U, typename F>
void for_each_param_pair(Network<T>& a, Network<U>& b, F&& f) {
  std::vector<Tensor<T>*> pa;
  std::vector<Tensor<U>*> pb;
  for_each_param(a, [&](Tensor<T>& t) { pa.push_back(&t); });
  for_each_param(b, [&](Tensor<U>& t) { pb.push_back(&t); });
  if (pa.size() != pb.size())
    throw std::invalid_argument("shape-error: parameter lists differ in length");
  for (std::size_t i = 0; i < pa.size(); ++i) f(*pa[i], *pb[i]);
}

template <typename T>
std::size_t param_count(const Network<T>& net) {
  std::size_t n = 0;
  for_each_param(const_cast<Network<T>&>(net), [&](Tensor<T>& t) { n += t.size(); });
  return n;
}

/// Same structure and shapes, all parameters zero. Used as the gradient
/// container so traversal stays symmetric with the model.
template <typename T>
Network<T> zeros_like(const Network<T>& net) {
  Network<T> g = net;
  for_each_param(g, [](Tensor<T>& t) { std::fill(t.data.begin(), t.data.end(), T(0)); });
  return g;
}

// --- initialization ---

namespace detail {

template <typename T>
void he_init(Tensor<T>& w, int fan_in, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / fan_in));
  for (T& v : w.data) v = static_cast<T>(gauss(rng));
}

template <typename T>
ConvLayer<T> make_conv(int in_c, int out_c, int k, int stride, int pad, std::mt19937_64& rng) {
  ConvLayer<T> l;
  l.spec = {in_c, out_c, k, stride, pad};
  l.w = Tensor<T>({out_c, in_c * k * k});
  he_init(l.w, l.spec.patch(), rng);
  return l;
}

template <typename T>
BatchNormLayer<T> make_bn(int channels) {
  BatchNormLayer<T> l;
  l.channels = channels;
  l.gamma = Tensor<T>({channels});
  l.beta = Tensor<T>({channels});
  l.run_mean = Tensor<T>({channels});
  l.run_var = Tensor<T>({channels});
  std::fill(l.gamma.data.begin(), l.gamma.data.end(), T(1));
  std::fill(l.run_var.data.begin(), l.run_var.data.end(), T(1));
  return l;
}

}  // namespace detail

template <typename T = float>
Network<T> init_network(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  // Parameters are drawn in double and narrowed, so nets instantiated at
  // different precisions from one seed share values exactly.
  std::mt19937_64 rng = make_rng(seed, fnv1a("init"));
  Network<T> net;
  net.config = config;

  const bool deep_stem = config.variant == Variant::resnet18;
  net.stem = deep_stem ? detail::make_conv<T>(3, config.stem_channels, 7, 2, 3, rng)
                       : detail::make_conv<T>(3, config.stem_channels, 3, 1, 1, rng);
  net.stem_bn = detail::make_bn<T>(config.stem_channels);

  int in_c = config.stem_channels;
  for (std::size_t stage = 0; stage < config.stage_channels.size(); ++stage) {
    const int out_c = config.stage_channels[stage];
    for (int b = 0; b < config.blocks_per_stage; ++b) {
      const int stride = (b == 0 && stage > 0) ? 2 : 1;
      ResidualBlock<T> block;
      block.conv1 = detail::make_conv<T>(in_c, out_c, 3, stride, 1, rng);
      block.bn1 = detail::make_bn<T>(out_c);
      block.conv2 = detail::make_conv<T>(out_c, out_c, 3, 1, 1, rng);
      block.bn2 = detail::make_bn<T>(out_c);
      if (stride != 1 || in_c != out_c) {
        block.has_proj = true;
        block.proj = detail::make_conv<T>(in_c, out_c, 1, stride, 0, rng);
        block.proj_bn = detail::make_bn<T>(out_c);
      }
      net.blocks.push_back(std::move(block));
      in_c = out_c;
    }
  }

  net.head.in = in_c;
  net.head.out = config.n_classes;
  net.head.w = Tensor<T>({config.n_classes, in_c});
  net.head.b = Tensor<T>({config.n_classes});
  detail::he_init(net.head.w, in_c, rng);
  return net;
}

// --- forward / backward ---

template <typename T>
struct BlockCache {
  Tensor<T> in;         // block input
  Tensor<T> relu1_out;  // conv1 -> bn1 -> relu
  Tensor<T> out;        // post add + relu
  BnCache<T> bn1, bn2, bnp;
};

template <typename T>
struct ForwardCache {
  bool train = false;
  std::vector<int> batch_shape;
  Tensor<T> input;
  BnCache<T> stem_bn;
  Tensor<T> stem_out;  // post relu (the maxpool input for resnet18)
  std::vector<int> pool_argmax;
  std::vector<BlockCache<T>> blocks;
  Tensor<T> gap_in;   // last block output
  Tensor<T> head_in;  // pooled features
};

template <typename T>
Tensor<T> forward(Network<T>& net, const Tensor<T>& batch, bool train_mode,
                  ForwardCache<T>* cache = nullptr) {
  const int S = net.config.input_side;
  if (batch.shape.size() != 4 || batch.shape[1] != 3 || batch.shape[2] != S ||
      batch.shape[3] != S)
    throw std::invalid_argument("shape-error: batch expected (B,3," + std::to_string(S) + "," +
                                std::to_string(S) + "), got " + shape_string(batch.shape));
  const bool norm = net.use_norm();
  if (cache) {
    cache->train = train_mode;
    cache->batch_shape = batch.shape;
    cache->blocks.assign(net.blocks.size(), BlockCache<T>{});
    cache->input = batch;
  }

  Tensor<T> x = conv_forward(net.stem, batch);
  if (norm) x = batchnorm_forward(net.stem_bn, x, train_mode, cache ? &cache->stem_bn : nullptr);
  relu_inplace(x);
  if (cache) cache->stem_out = x;
  if (net.has_maxpool()) x = maxpool_forward(x, cache ? &cache->pool_argmax : nullptr);

  for (std::size_t i = 0; i < net.blocks.size(); ++i) {
    ResidualBlock<T>& block = net.blocks[i];
    BlockCache<T>* bc = cache ? &cache->blocks[i] : nullptr;
    if (bc) bc->in = x;

    Tensor<T> main = conv_forward(block.conv1, x);
    if (norm)
      main = batchnorm_forward(block.bn1, main, train_mode, bc ? &bc->bn1 : nullptr);
    relu_inplace(main);
    if (bc) bc->relu1_out = main;
    main = conv_forward(block.conv2, main);
    if (norm)
      main = batchnorm_forward(block.bn2, main, train_mode, bc ? &bc->bn2 : nullptr);

    Tensor<T> shortcut;
    if (block.has_proj) {
      shortcut = conv_forward(block.proj, x);
      if (norm)
        shortcut = batchnorm_forward(block.proj_bn, shortcut, train_mode,
                                     bc ? &bc->bnp : nullptr);
    } else {
      shortcut = x;
    }
    for (std::size_t j = 0; j < main.size(); ++j) main.data[j] += shortcut.data[j];
    relu_inplace(main);
    if (bc) bc->out = main;
    x = std::move(main);
  }

  if (cache) cache->gap_in = x;
  Tensor<T> pooled = gap_forward(x);
  if (cache) cache->head_in = pooled;
  return linear_forward(net.head, pooled);
}

/// Gradients for every trainable parameter, as a zeros_like(net) mirror.
/// Requires a cache produced by a train-mode forward.
template <typename T>
Network<T> backward(const Network<T>& net, const ForwardCache<T>& cache,
                    const Tensor<T>& dlogits) {
  if (!cache.train)
    throw std::logic_error("invalid-state: backward requires a train-mode forward cache");
  if (cache.blocks.size() != net.blocks.size() || cache.batch_shape.empty())
    throw std::logic_error("invalid-state: cache does not match this network");
  const int B = cache.batch_shape[0];
  if (dlogits.shape != std::vector<int>{B, net.config.n_classes})
    throw std::invalid_argument("shape-error: dlogits expected (" + std::to_string(B) + "," +
                                std::to_string(net.config.n_classes) + "), got " +
                                shape_string(dlogits.shape));
  const bool norm = net.use_norm();
  Network<T> grads = zeros_like(net);

  Tensor<T> d = linear_backward(net.head, cache.head_in, dlogits, grads.head.w, grads.head.b);
  d = gap_backward(d, cache.gap_in.shape);

  for (std::size_t ii = net.blocks.size(); ii-- > 0;) {
    const ResidualBlock<T>& block = net.blocks[ii];
    ResidualBlock<T>& g = grads.blocks[ii];
    const BlockCache<T>& bc = cache.blocks[ii];

    Tensor<T> dsum = relu_backward(bc.out, d);

    // Main branch: bn2 <- conv2 <- relu1 <- bn1 <- conv1.
    Tensor<T> dmain = dsum;
    if (norm) dmain = batchnorm_backward(block.bn2, bc.bn2, dmain, g.bn2.gamma, g.bn2.beta);
    dmain = conv_backward(block.conv2, bc.relu1_out, dmain, g.conv2.w);
    dmain = relu_backward(bc.relu1_out, dmain);
    if (norm) dmain = batchnorm_backward(block.bn1, bc.bn1, dmain, g.bn1.gamma, g.bn1.beta);
    Tensor<T> dx = conv_backward(block.conv1, bc.in, dmain, g.conv1.w);

    // Shortcut branch adds its share of the block-input gradient.
    if (block.has_proj) {
      Tensor<T> dshort = dsum;
      if (norm)
        dshort = batchnorm_backward(block.proj_bn, bc.bnp, dshort, g.proj_bn.gamma,
                                    g.proj_bn.beta);
      dshort = conv_backward(block.proj, bc.in, dshort, g.proj.w);
      for (std::size_t j = 0; j < dx.size(); ++j) dx.data[j] += dshort.data[j];
    } else {
      for (std::size_t j = 0; j < dx.size(); ++j) dx.data[j] += dsum.data[j];
    }
    d = std::move(dx);
  }

  if (net.has_maxpool()) d = maxpool_backward(cache.pool_argmax, d, cache.stem_out.shape);
  d = relu_backward(cache.stem_out, d);
  if (norm)
    d = batchnorm_backward(net.stem_bn, cache.stem_bn, d, grads.stem_bn.gamma,
                           grads.stem_bn.beta);
  conv_backward(net.stem, cache.input, d, grads.stem.w);
  return grads;
}

}  // namespace sstml::nn

#endif
