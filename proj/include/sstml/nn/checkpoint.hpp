#ifndef SSTML_NN_CHECKPOINT_HPP
#define SSTML_NN_CHECKPOINT_HPP

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sstml/nn/network.hpp"

namespace sstml::nn {

/// Checkpoint blob layout (all integers and floats little-endian):
///   bytes 0..7   magic "SSTMLNET"
///   u32          format version (1)
///   i32          input_side
///   i32          stem_channels
///   i32          n_stages, then i32 per stage channel count
///   i32          blocks_per_stage
///   i32          n_classes
///   u8           normalization (0 = batch, 1 = none)
///   u8           variant (0 = compact, 1 = resnet18)
///   u64          parameter tensor count, then per tensor:
///                  u32 ndim, i32 dims..., f64 values...
///   u64          normalization statistic tensor count, then per tensor the
///                same encoding (run_mean, run_var per batchnorm layer in
///                traversal order)
inline constexpr char kCheckpointMagic[8] = {'S', 'S', 'T', 'M', 'L', 'N', 'E', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename V>
void put(std::ostream& out, V v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V get(std::istream& in) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(V));
  if (!in) throw std::runtime_error("parse-error: truncated checkpoint");
  return v;
}

template <typename T>
void put_tensor(std::ostream& out, const Tensor<T>& t) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
  for (int d : t.shape) put<std::int32_t>(out, d);
  for (T v : t.data) put<double>(out, static_cast<double>(v));
}

template <typename T>
Tensor<T> get_tensor(std::istream& in) {
  const auto ndim = get<std::uint32_t>(in);
  std::vector<int> shape(ndim);
  for (auto& d : shape) d = get<std::int32_t>(in);
  Tensor<T> t(shape);
  for (T& v : t.data) v = static_cast<T>(get<double>(in));
  return t;
}

template <typename T, typename F>
void for_each_norm_stat(Network<T>& net, F&& f) {
  auto bn = [&](BatchNormLayer<T>& l) {
    f(l.run_mean);
    f(l.run_var);
  };
  bn(net.stem_bn);
  for (auto& block : net.blocks) {
    bn(block.bn1);
    bn(block.bn2);
    if (block.has_proj) bn(block.proj_bn);
  }
}

}  // namespace detail

template <typename T>
void save_checkpoint(const Network<T>& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("io-error: cannot write '" + path + "'");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put<std::uint32_t>(out, kCheckpointVersion);

  const NetworkConfig& c = net.config;
  detail::put<std::int32_t>(out, c.input_side);
  detail::put<std::int32_t>(out, c.stem_channels);
  detail::put<std::int32_t>(out, static_cast<std::int32_t>(c.stage_channels.size()));
  for (int s : c.stage_channels) detail::put<std::int32_t>(out, s);
  detail::put<std::int32_t>(out, c.blocks_per_stage);
  detail::put<std::int32_t>(out, c.n_classes);
  detail::put<std::uint8_t>(out, c.normalization == Normalization::batch ? 0 : 1);
  detail::put<std::uint8_t>(out, c.variant == Variant::compact ? 0 : 1);

  auto& mutable_net = const_cast<Network<T>&>(net);
  std::uint64_t n_params = 0;
  for_each_param(mutable_net, [&](Tensor<T>&) { ++n_params; });
  detail::put<std::uint64_t>(out, n_params);
  for_each_param(mutable_net, [&](Tensor<T>& t) { detail::put_tensor(out, t); });

  std::uint64_t n_stats = 0;
  detail::for_each_norm_stat(mutable_net, [&](Tensor<T>&) { ++n_stats; });
  detail::put<std::uint64_t>(out, n_stats);
  detail::for_each_norm_stat(mutable_net, [&](Tensor<T>& t) { detail::put_tensor(out, t); });
  if (!out) throw std::runtime_error("io-error: write failed for '" + path + "'");
}

template <typename T = float>
Network<T> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io-error: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kCheckpointMagic))
    throw std::runtime_error("parse-error: not a checkpoint file");
  if (detail::get<std::uint32_t>(in) != kCheckpointVersion)
    throw std::runtime_error("parse-error: unsupported checkpoint version");

  NetworkConfig c;
  c.input_side = detail::get<std::int32_t>(in);
  c.stem_channels = detail::get<std::int32_t>(in);
  c.stage_channels.resize(detail::get<std::int32_t>(in));
  for (int& s : c.stage_channels) s = detail::get<std::int32_t>(in);
  c.blocks_per_stage = detail::get<std::int32_t>(in);
  c.n_classes = detail::get<std::int32_t>(in);
  c.normalization =
      detail::get<std::uint8_t>(in) == 0 ? Normalization::batch : Normalization::none;
  c.variant = detail::get<std::uint8_t>(in) == 0 ? Variant::compact : Variant::resnet18;

  Network<T> net = init_network<T>(c, 0);
  std::uint64_t n_params = detail::get<std::uint64_t>(in);
  std::uint64_t seen = 0;
  for_each_param(net, [&](Tensor<T>& t) {
    Tensor<T> loaded = detail::get_tensor<T>(in);
    if (loaded.shape != t.shape)
      throw std::runtime_error("parse-error: checkpoint tensor shape mismatch");
    t = std::move(loaded);
    ++seen;
  });
  if (seen != n_params) throw std::runtime_error("parse-error: parameter count mismatch");

  std::uint64_t n_stats = detail::get<std::uint64_t>(in);
  seen = 0;
  detail::for_each_norm_stat(net, [&](Tensor<T>& t) {
    t = detail::get_tensor<T>(in);
    ++seen;
  });
  if (seen != n_stats) throw std::runtime_error("parse-error: statistic count mismatch");
  return net;
}

}  // namespace sstml::nn

#endif
