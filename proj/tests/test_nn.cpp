#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "sstml/nn.hpp"

using namespace sstml;
using namespace sstml::nn;

namespace {

template <typename T>
void fill_uniform(Tensor<T>& t, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (T& v : t.data) v = static_cast<T>(u(rng));
}

// Reference matmul in the same k-ascending accumulation order.
template <typename T>
void naive_gemm(int M, int N, int K, const T* A, const T* B, T* C) {
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) {
      T s = 0;
      for (int k = 0; k < K; ++k) s += A[i * K + k] * B[static_cast<long long>(k) * N + j];
      C[i * N + j] = s;
    }
}

// Direct five-loop convolution, independent of the im2col path.
template <typename T>
Tensor<T> naive_conv(const ConvLayer<T>& layer, const Tensor<T>& x) {
  const ConvSpec& s = layer.spec;
  const int B = x.shape[0], H = x.shape[2], W = x.shape[3];
  const int OH = s.out_size(H), OW = s.out_size(W);
  Tensor<T> y({B, s.out_c, OH, OW});
  for (int b = 0; b < B; ++b)
    for (int o = 0; o < s.out_c; ++o)
      for (int oy = 0; oy < OH; ++oy)
        for (int ox = 0; ox < OW; ++ox) {
          double acc = 0.0;
          for (int c = 0; c < s.in_c; ++c)
            for (int ky = 0; ky < s.k; ++ky)
              for (int kx = 0; kx < s.k; ++kx) {
                const int iy = oy * s.stride + ky - s.pad;
                const int ix = ox * s.stride + kx - s.pad;
                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                acc += static_cast<double>(
                           x.data[((static_cast<long long>(b) * s.in_c + c) * H + iy) * W + ix]) *
                       layer.w.data[(static_cast<long long>(o) * s.in_c + c) * s.k * s.k +
                                    ky * s.k + kx];
              }
          y.data[((static_cast<long long>(b) * s.out_c + o) * OH + oy) * OW + ox] =
              static_cast<T>(acc);
        }
  return y;
}

ImageChunk random_chunk(int n, int side, double minority, Rng& rng) {
  ImageChunk chunk;
  chunk.side = side;
  chunk.count = static_cast<std::size_t>(n);
  chunk.pixels.resize(chunk.count * side * side);
  chunk.labels.resize(chunk.count);
  std::bernoulli_distribution pix(0.15);
  for (auto& p : chunk.pixels) p = pix(rng) ? 255 : 0;
  const int n_min = static_cast<int>(n * minority);
  for (int i = 0; i < n; ++i) chunk.labels[static_cast<std::size_t>(i)] = i < n_min;
  std::shuffle(chunk.labels.begin(), chunk.labels.end(), rng);
  return chunk;
}

NetworkConfig tiny_config(int side = 16) {
  NetworkConfig c;
  c.input_side = side;
  c.stem_channels = 4;
  c.stage_channels = {4, 8};
  c.blocks_per_stage = 1;
  return c;
}

template <typename T>
std::vector<T> snapshot(Network<T>& net) {
  std::vector<T> out;
  for_each_param(net, [&](Tensor<T>& p) { out.insert(out.end(), p.data.begin(), p.data.end()); });
  detail::for_each_norm_stat(net,
                             [&](Tensor<T>& p) { out.insert(out.end(), p.data.begin(), p.data.end()); });
  return out;
}

}  // namespace

TEST_CASE("gemm kernels agree with a naive reference") {
  Rng rng = make_rng(3, 0);
  for (auto [M, N, K] : std::vector<std::array<int, 3>>{{4, 7, 9}, {16, 120, 27}, {5, 3, 64},
                                                        {1, 1, 1}, {6, 33, 2}}) {
    Tensor<double> A({M, K}), B({K, N}), Bt({N, K});
    fill_uniform(A, rng);
    fill_uniform(B, rng);
    fill_uniform(Bt, rng);
    std::vector<double> c1(static_cast<std::size_t>(M) * N), c2(c1.size());
    gemm_nn(M, N, K, A.ptr(), B.ptr(), c1.data(), false);
    naive_gemm(M, N, K, A.ptr(), B.ptr(), c2.data());
    for (std::size_t i = 0; i < c1.size(); ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-12));

    // nt form: B stored transposed.
    std::vector<double> bt_as_b(static_cast<std::size_t>(K) * N);
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < N; ++j) bt_as_b[static_cast<std::size_t>(k) * N + j] =
          Bt.data[static_cast<std::size_t>(j) * K + k];
    gemm_nt(M, N, K, A.ptr(), Bt.ptr(), c1.data(), false);
    naive_gemm(M, N, K, A.ptr(), bt_as_b.data(), c2.data());
    for (std::size_t i = 0; i < c1.size(); ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-12));
  }
}

TEST_CASE("im2col and col2im are adjoint") {
  Rng rng = make_rng(4, 0);
  for (ConvSpec s : {ConvSpec{3, 1, 3, 1, 1}, ConvSpec{2, 1, 3, 2, 1}, ConvSpec{4, 1, 1, 2, 0},
                     ConvSpec{3, 1, 7, 2, 3}}) {
    const int H = 11, W = 9;
    const int ohw = s.out_size(H) * s.out_size(W);
    Tensor<double> x({1, s.in_c, H, W});
    fill_uniform(x, rng);
    std::vector<double> col(static_cast<std::size_t>(s.patch()) * ohw);
    im2col(x.ptr(), H, W, s, col.data());

    Tensor<double> c({s.patch(), ohw});
    fill_uniform(c, rng);
    Tensor<double> back({1, s.in_c, H, W});
    col2im(c.ptr(), H, W, s, back.ptr());

    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < col.size(); ++i) lhs += col[i] * c.data[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x.data[i] * back.data[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("conv_forward matches direct convolution for every kernel shape in use") {
  Rng rng = make_rng(5, 0);
  for (ConvSpec s : {ConvSpec{3, 16, 3, 1, 1}, ConvSpec{16, 32, 3, 2, 1},
                     ConvSpec{16, 32, 1, 2, 0}, ConvSpec{3, 8, 7, 2, 3}}) {
    ConvLayer<double> layer;
    layer.spec = s;
    layer.w = Tensor<double>({s.out_c, s.patch()});
    fill_uniform(layer.w, rng);
    Tensor<double> x({2, s.in_c, 13, 13});
    fill_uniform(x, rng);
    Tensor<double> fast = conv_forward(layer, x);
    Tensor<double> slow = naive_conv(layer, x);
    REQUIRE(fast.shape == slow.shape);
    for (std::size_t i = 0; i < fast.size(); ++i)
      CHECK(fast.data[i] == doctest::Approx(slow.data[i]).epsilon(1e-10));
  }
}

TEST_CASE("batchnorm standardizes in train mode and tracks running stats") {
  BatchNormLayer<double> bn;
  bn.channels = 3;
  bn.gamma = Tensor<double>({3});
  bn.beta = Tensor<double>({3});
  bn.run_mean = Tensor<double>({3});
  bn.run_var = Tensor<double>({3});
  std::fill(bn.gamma.data.begin(), bn.gamma.data.end(), 1.0);
  std::fill(bn.run_var.data.begin(), bn.run_var.data.end(), 1.0);

  Rng rng = make_rng(6, 0);
  Tensor<double> x({4, 3, 5, 5});
  fill_uniform(x, rng, 2.0, 8.0);

  BnCache<double> cache;
  Tensor<double> y = batchnorm_forward(bn, x, true, &cache);
  const long long n = 4 * 5 * 5;
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0, var = 0.0;
    for (int b = 0; b < 4; ++b)
      for (int i = 0; i < 25; ++i) mean += y.data[(b * 3 + c) * 25 + i];
    mean /= n;
    for (int b = 0; b < 4; ++b)
      for (int i = 0; i < 25; ++i) {
        double d = y.data[(b * 3 + c) * 25 + i] - mean;
        var += d * d;
      }
    var /= n;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps in the denominator

    // One update from (0, 1) with momentum 0.1 toward the batch statistics.
    double bmean = 0.0, bvar = 0.0;
    for (int b = 0; b < 4; ++b)
      for (int i = 0; i < 25; ++i) bmean += x.data[(b * 3 + c) * 25 + i];
    bmean /= n;
    for (int b = 0; b < 4; ++b)
      for (int i = 0; i < 25; ++i) {
        double d = x.data[(b * 3 + c) * 25 + i] - bmean;
        bvar += d * d;
      }
    bvar /= n - 1;
    CHECK(bn.run_mean.data[c] == doctest::Approx(0.1 * bmean).epsilon(1e-9));
    CHECK(bn.run_var.data[c] == doctest::Approx(0.9 + 0.1 * bvar).epsilon(1e-9));
  }

  // Eval mode mutates nothing.
  auto mean_before = bn.run_mean.data;
  Tensor<double> e1 = batchnorm_forward(bn, x, false, static_cast<BnCache<double>*>(nullptr));
  Tensor<double> e2 = batchnorm_forward(bn, x, false, static_cast<BnCache<double>*>(nullptr));
  CHECK(e1.data == e2.data);
  CHECK(bn.run_mean.data == mean_before);
}

TEST_CASE("init_network is deterministic and reports the hand-counted size") {
  NetworkConfig c;  // compact default: stem 16; stages 16,32,64; 2 blocks
  Network<float> a = init_network<float>(c, 123);
  Network<float> b = init_network<float>(c, 123);
  CHECK(snapshot(a) == snapshot(b));
  Network<float> other = init_network<float>(c, 124);
  CHECK(snapshot(a) != snapshot(other));

  // Independent count from the layer formula.
  std::size_t expect = 3ull * 3 * 3 * c.stem_channels + 2ull * c.stem_channels;
  int in_c = c.stem_channels;
  for (std::size_t stage = 0; stage < c.stage_channels.size(); ++stage) {
    int out_c = c.stage_channels[stage];
    for (int blk = 0; blk < c.blocks_per_stage; ++blk) {
      int stride = (blk == 0 && stage > 0) ? 2 : 1;
      expect += 9ull * in_c * out_c + 2ull * out_c;   // conv1 + bn1
      expect += 9ull * out_c * out_c + 2ull * out_c;  // conv2 + bn2
      if (stride != 1 || in_c != out_c) expect += 1ull * in_c * out_c + 2ull * out_c;
      in_c = out_c;
    }
  }
  expect += static_cast<std::size_t>(in_c) * c.n_classes + c.n_classes;
  CHECK(param_count(a) == expect);
  CHECK(param_count(a) == 174738u);

  for (auto& block : a.blocks)
    for (double v : block.bn1.run_var.data) CHECK(v == 1.0f);
}

TEST_CASE("forward obeys the shape contract and stays finite") {
  NetworkConfig c;
  c.input_side = 50;
  Network<float> net = init_network<float>(c, 9);
  Tensor<float> batch({8, 3, 50, 50});  // all zeros
  Tensor<float> logits = forward(net, batch, false);
  CHECK(logits.shape == std::vector<int>{8, 2});
  for (float v : logits.data) CHECK(std::isfinite(v));

  Tensor<float> bad({8, 1, 50, 50});
  CHECK_THROWS_WITH_AS(forward(net, bad, false), doctest::Contains("shape-error"),
                       std::invalid_argument);
}

TEST_CASE("eval-mode forward is pure") {
  Network<float> net = init_network<float>(tiny_config(), 10);
  Rng rng = make_rng(10, 1);
  Tensor<float> batch({4, 3, 16, 16});
  fill_uniform(batch, rng, 0.0, 1.0);
  auto before = snapshot(net);
  Tensor<float> l1 = forward(net, batch, false);
  Tensor<float> l2 = forward(net, batch, false);
  CHECK(l1.data == l2.data);
  CHECK(snapshot(net) == before);

  // Train mode does update normalization statistics.
  forward(net, batch, true);
  CHECK(snapshot(net) != before);
}

TEST_CASE("class_weights follows N/(2*Nc) and flags absent classes") {
  std::vector<int> labels(250, 0);
  std::fill(labels.begin(), labels.begin() + 25, 1);
  ClassWeights w = class_weights(labels);
  CHECK(w.w[1] == doctest::Approx(5.0));
  CHECK(w.w[0] == doctest::Approx(0.5556).epsilon(1e-3));
  CHECK_FALSE(w.degenerate);

  ClassWeights balanced = class_weights({0, 1, 0, 1});
  CHECK(balanced.w[0] == doctest::Approx(1.0));
  CHECK(balanced.w[1] == doctest::Approx(1.0));

  ClassWeights single = class_weights({0, 0, 0});
  CHECK(single.degenerate);
  CHECK(single.w[1] == 0.0);
  CHECK(single.w[0] == doctest::Approx(0.5));
}

TEST_CASE("weighted cross-entropy: values, stability, and gradient oracle") {
  ClassWeights unit;
  Tensor<double> z({1, 2});
  auto [loss0, g0] = weighted_cross_entropy(z, {0}, unit);
  CHECK(loss0 == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  z.data = {1000.0, 0.0};
  auto [loss_big, g_big] = weighted_cross_entropy(z, {0}, unit);
  CHECK(loss_big < 1e-6);
  CHECK(std::isfinite(loss_big));
  for (double v : g_big.data) CHECK(std::isfinite(v));

  // Central finite differences on random logits.
  Rng rng = make_rng(11, 0);
  Tensor<double> logits({8, 2});
  fill_uniform(logits, rng, -2.0, 2.0);
  std::vector<int> labels{0, 1, 1, 0, 1, 0, 0, 1};
  ClassWeights w;
  w.w = {0.6, 3.2};
  auto [loss, grad] = weighted_cross_entropy(logits, labels, w);
  const double h = 1e-5;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    Tensor<double> zp = logits, zm = logits;
    zp.data[i] += h;
    zm.data[i] -= h;
    double fp = weighted_cross_entropy(zp, labels, w).first;
    double fm = weighted_cross_entropy(zm, labels, w).first;
    double fd = (fp - fm) / (2 * h);
    CHECK(grad.data[i] == doctest::Approx(fd).epsilon(1e-6));
  }

  ClassWeights zero;
  zero.w = {0.0, 0.0};
  CHECK_THROWS_WITH_AS(weighted_cross_entropy(logits, labels, zero),
                       doctest::Contains("degenerate-batch"), std::invalid_argument);
}

TEST_CASE("sgd momentum recurrence") {
  NetworkConfig c = tiny_config();
  c.normalization = Normalization::none;
  c.stage_channels = {4};
  Network<double> net = init_network<double>(c, 1);
  for_each_param(net, [](Tensor<double>& p) { std::fill(p.data.begin(), p.data.end(), 1.0); });
  Network<double> g = zeros_like(net);
  for_each_param(g, [](Tensor<double>& p) { std::fill(p.data.begin(), p.data.end(), 0.5); });

  OptimizerState<double> plain(0.1, 0.0, net);
  sgd_momentum_step(plain, net, g);
  for_each_param(net, [](Tensor<double>& p) {
    for (double v : p.data) CHECK(v == doctest::Approx(0.95).epsilon(1e-15));
  });

  for_each_param(net, [](Tensor<double>& p) { std::fill(p.data.begin(), p.data.end(), 1.0); });
  OptimizerState<double> mom(0.1, 0.9, net);
  sgd_momentum_step(mom, net, g);
  for_each_param(net, [](Tensor<double>& p) {
    for (double v : p.data) CHECK(v == doctest::Approx(0.95).epsilon(1e-15));
  });
  sgd_momentum_step(mom, net, g);
  for_each_param(net, [](Tensor<double>& p) {
    for (double v : p.data) CHECK(v == doctest::Approx(0.855).epsilon(1e-15));
  });

  // Zero gradient, zero velocity: fixed point.
  Network<double> z = zeros_like(net);
  OptimizerState<double> still(0.1, 0.9, net);
  auto before = snapshot(net);
  sgd_momentum_step(still, net, z);
  CHECK(snapshot(net) == before);
}

TEST_CASE("train_one_epoch: minibatch count, determinism, degenerate chunks") {
  Rng crng = make_rng(12, 0);
  ImageChunk chunk = random_chunk(250, 16, 0.1, crng);
  chunk.chunk_index = 3;

  NetworkConfig c = tiny_config();
  auto run = [&](std::uint64_t seed) {
    Network<float> net = init_network<float>(c, seed);
    OptimizerState<float> opt(0.001, 0.9, net);
    Rng rng = make_rng(seed, 99);
    LossReport rep = train_one_epoch(net, opt, chunk, 8, rng);
    return std::pair{rep, snapshot(net)};
  };
  auto [rep1, snap1] = run(7);
  auto [rep2, snap2] = run(7);
  CHECK(rep1.minibatch_count == 32);  // ceil(250/8)
  CHECK(rep1.chunk_index == 3);
  CHECK(std::isfinite(rep1.mean_loss));
  CHECK(rep1.mean_loss >= 0.0);
  CHECK(snap1 == snap2);
  CHECK(rep1.mean_loss == rep2.mean_loss);

  ImageChunk single = random_chunk(16, 16, 0.2, crng);
  std::fill(single.labels.begin(), single.labels.end(), 0);
  Network<float> net = init_network<float>(c, 5);
  OptimizerState<float> opt(0.001, 0.9, net);
  Rng rng = make_rng(5, 99);
  LossReport rep = train_one_epoch(net, opt, single, 8, rng);
  CHECK(rep.weights.degenerate);
  CHECK(rep.weights.w[1] == 0.0);
  CHECK(std::isfinite(rep.mean_loss));
}

TEST_CASE("predict yields normalized scores, purity, and class-0 ties") {
  Rng crng = make_rng(13, 0);
  ImageChunk chunk = random_chunk(40, 16, 0.25, crng);
  Network<float> net = init_network<float>(tiny_config(), 21);

  Prediction p1 = predict(net, chunk);
  Prediction p2 = predict(net, chunk);
  CHECK(p1.labels == p2.labels);
  CHECK(p1.scores == p2.scores);
  REQUIRE(p1.labels.size() == 40);
  for (std::size_t i = 0; i < p1.scores.size(); ++i) {
    CHECK(p1.scores[i][0] + p1.scores[i][1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(p1.labels[i] == (p1.scores[i][1] > p1.scores[i][0] ? 1 : 0));
  }

  // Zeroed head gives exactly tied logits -> class 0 everywhere.
  std::fill(net.head.w.data.begin(), net.head.w.data.end(), 0.0f);
  std::fill(net.head.b.data.begin(), net.head.b.data.end(), 0.0f);
  Prediction tied = predict(net, chunk);
  for (int label : tied.labels) CHECK(label == 0);
}

TEST_CASE("checkpoint round-trip preserves the model bit-for-bit") {
  Network<float> net = init_network<float>(tiny_config(), 31);
  // Give the running stats a non-default value first.
  Rng rng = make_rng(31, 7);
  Tensor<float> batch({4, 3, 16, 16});
  fill_uniform(batch, rng, 0.0, 1.0);
  forward(net, batch, true);

  const std::string path = "sstml_test_ckpt.bin";
  save_checkpoint(net, path);
  Network<float> loaded = load_checkpoint<float>(path);
  CHECK(loaded.config.stage_channels == net.config.stage_channels);
  CHECK(snapshot(loaded) == snapshot(net));

  Tensor<float> l1 = forward(net, batch, false);
  Tensor<float> l2 = forward(loaded, batch, false);
  CHECK(l1.data == l2.data);

  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint<float>(path), std::runtime_error);
}

TEST_CASE("backward rejects eval caches and zero upstream gives zero gradients") {
  Network<double> net = init_network<double>(tiny_config(), 41);
  Rng rng = make_rng(41, 1);
  Tensor<double> batch({2, 3, 16, 16});
  fill_uniform(batch, rng, 0.0, 1.0);

  ForwardCache<double> cache;
  forward(net, batch, false, &cache);
  Tensor<double> dz({2, 2});
  CHECK_THROWS_WITH_AS(backward(net, cache, dz), doctest::Contains("invalid-state"),
                       std::logic_error);

  forward(net, batch, true, &cache);
  Network<double> grads = backward(net, cache, dz);  // dz is all zeros
  for_each_param(grads, [](Tensor<double>& g) {
    for (double v : g.data) CHECK(v == 0.0);
  });

  // All-zero input stays finite.
  Tensor<double> zeros({2, 3, 16, 16});
  forward(net, zeros, true, &cache);
  dz.data = {0.3, -0.3, -0.1, 0.1};
  Network<double> g2 = backward(net, cache, dz);
  for_each_param(g2, [](Tensor<double>& g) {
    for (double v : g.data) CHECK(std::isfinite(v));
  });
}
