#ifndef SSTML_METHODS_HPP
#define SSTML_METHODS_HPP

#include <optional>
#include <string>
#include <vector>

#include "sstml/baselines.hpp"
#include "sstml/encoder.hpp"
#include "sstml/evaluation.hpp"
#include "sstml/nn.hpp"
#include "sstml/streams.hpp"

namespace sstml::methods {

struct SstmlOptions {
  int image_side = 30;
  int chars_per_cell = 5;
  int batch_size = 8;
  double learning_rate = 0.001;
  double momentum = 0.9;
  nn::Variant variant = nn::Variant::compact;
  nn::Normalization normalization = nn::Normalization::batch;
  std::uint64_t seed = 0;
};

/// STML encoding + compact CNN, one epoch per chunk. The network is built
/// lazily on the first chunk (the layout needs the feature count); each
/// chunk is encoded once and reused between the predict and train phases.
class SstmlMethod final : public evaluation::StreamMethod {
 public:
  explicit SstmlMethod(SstmlOptions options);

  void learn_chunk(const TabularChunk& chunk) override;
  std::vector<int> predict(const FeatureMatrix& features) override;
  double drain_encode_seconds() override;

  const nn::Network<float>& network() const;

 private:
  const ImageChunk& encoded(const FeatureMatrix& features, const std::vector<int>* labels);
  void ensure_setup(int n_features);

  SstmlOptions options_;
  encoder::GlyphFont font_;
  std::optional<encoder::LayoutPlan> plan_;
  std::optional<nn::Network<float>> net_;
  std::optional<nn::OptimizerState<float>> opt_;
  int chunks_learned_ = 0;
  double encode_seconds_ = 0.0;
  std::vector<double> cached_features_;
  ImageChunk cache_;
};

class HoeffdingMethod final : public evaluation::StreamMethod {
 public:
  explicit HoeffdingMethod(baselines::HoeffdingConfig config = {}) : tree_(config) {}

  void learn_chunk(const TabularChunk& chunk) override { tree_.learn_chunk(chunk); }
  std::vector<int> predict(const FeatureMatrix& features) override { return tree_.predict(features); }

  const baselines::HoeffdingTree& tree() const { return tree_; }

 private:
  baselines::HoeffdingTree tree_;
};

class CdsMethod final : public evaluation::StreamMethod {
 public:
  explicit CdsMethod(baselines::CdsConfig config = {}, std::uint64_t seed = 0)
      : ensemble_(config), rng_(make_rng(seed, fnv1a("cds-smote"))) {}

  void learn_chunk(const TabularChunk& chunk) override { ensemble_.learn_chunk(chunk, rng_); }
  std::vector<int> predict(const FeatureMatrix& features) override {
    if (ensemble_.size() == 0) return std::vector<int>(features.rows, 0);
    return ensemble_.predict(features);
  }

  const baselines::CdsEnsemble& ensemble() const { return ensemble_; }

 private:
  baselines::CdsEnsemble ensemble_;
  Rng rng_;
};

/// Replays the true labels of the chunk after the one it last trained on;
/// an upper-bound reference for harness checks.
class OracleMethod final : public evaluation::StreamMethod {
 public:
  explicit OracleMethod(const streams::ChunkSource& source) : source_(&source) {}

  void learn_chunk(const TabularChunk& chunk) override { next_ = chunk.chunk_index + 1; }
  std::vector<int> predict(const FeatureMatrix& features) override;

 private:
  const streams::ChunkSource* source_;
  int next_ = 0;
};

}  // namespace sstml::methods

#endif
