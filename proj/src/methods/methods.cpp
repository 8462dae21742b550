#include "sstml/methods.hpp"

#include <chrono>
#include <stdexcept>

namespace sstml::methods {

SstmlMethod::SstmlMethod(SstmlOptions options)
    : options_(options), font_(encoder::GlyphFont::standard()) {
  if (options_.batch_size < 1) throw std::invalid_argument("invalid-config: batch_size must be >= 1");
  if (!(options_.learning_rate > 0.0))
    throw std::invalid_argument("invalid-config: learning_rate must be > 0");
}

void SstmlMethod::ensure_setup(int n_features) {
  if (plan_) return;
  plan_ = encoder::plan_layout(n_features, options_.image_side, options_.chars_per_cell);
  nn::NetworkConfig config = options_.variant == nn::Variant::resnet18
                                 ? nn::NetworkConfig::resnet18(options_.image_side)
                                 : nn::NetworkConfig::compact(options_.image_side);
  config.normalization = options_.normalization;
  net_ = nn::init_network<float>(config, options_.seed);
  opt_.emplace(options_.learning_rate, options_.momentum, *net_);
}

const ImageChunk& SstmlMethod::encoded(const FeatureMatrix& features, const std::vector<int>* labels) {
  using clock = std::chrono::steady_clock;
  ensure_setup(static_cast<int>(features.cols));
  if (cached_features_ != features.values) {
    TabularChunk chunk;
    chunk.features = features;
    chunk.labels.assign(features.rows, 0);
    const auto t0 = clock::now();
    cache_ = encoder::encode_chunk(chunk, *plan_, font_);
    encode_seconds_ += std::chrono::duration<double>(clock::now() - t0).count();
    cached_features_ = features.values;
  }
  if (labels) cache_.labels = *labels;
  return cache_;
}

void SstmlMethod::learn_chunk(const TabularChunk& chunk) {
  const ImageChunk& images = encoded(chunk.features, &chunk.labels);
  Rng rng = make_rng(options_.seed, 0x20000ULL + static_cast<std::uint64_t>(chunks_learned_));
  nn::train_one_epoch(*net_, *opt_, images, options_.batch_size, rng);
  ++chunks_learned_;
}

std::vector<int> SstmlMethod::predict(const FeatureMatrix& features) {
  const ImageChunk& images = encoded(features, nullptr);
  return nn::predict(*net_, images).labels;
}

double SstmlMethod::drain_encode_seconds() {
  const double s = encode_seconds_;
  encode_seconds_ = 0.0;
  return s;
}

const nn::Network<float>& SstmlMethod::network() const {
  if (!net_) throw std::logic_error("invalid-state: network not built yet");
  return *net_;
}

std::vector<int> OracleMethod::predict(const FeatureMatrix& features) {
  if (next_ >= source_->n_chunks())
    throw std::out_of_range("invalid-state: oracle ran past the stream");
  const TabularChunk chunk = source_->chunk(next_);
  if (chunk.features.rows != features.rows)
    throw std::logic_error("invalid-state: oracle asked about an unexpected chunk");
  return chunk.labels;
}

}  // namespace sstml::methods
