#ifndef SSTML_STREAMS_HPP
#define SSTML_STREAMS_HPP

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sstml/random.hpp"
#include "sstml/types.hpp"

namespace sstml::streams {

enum class ConceptKind { gaussian_clusters, sea, hyperplane };
enum class DriftType { sudden, gradual, incremental };

ConceptKind concept_kind_from_string(const std::string& s);
DriftType drift_type_from_string(const std::string& s);
std::string to_string(ConceptKind k);
std::string to_string(DriftType t);

/// Parameters of one generating concept. Only the fields of the active
/// kind are meaningful.
struct ConceptParams {
  struct Centroid {
    std::vector<double> center;
    int label = 0;
    double scale = 0.1;
  };

  ConceptKind kind = ConceptKind::gaussian_clusters;
  std::vector<Centroid> centroids;  // gaussian-clusters: >= 1 per class
  double sea_theta = 8.0;           // sea: label 1 iff x0 + x1 <= theta
  std::vector<double> hyper_w;      // hyperplane: label 1 iff w.x > w0
  double hyper_w0 = 0.0;
};

struct StreamConfig {
  int n_chunks = 0;
  int chunk_size = 0;
  int n_features = 0;
  double minority_fraction = 0.1;  // class 1 share, in (0, 0.5]
  double label_noise = 0.0;        // flipped fraction, in [0, 0.5)
  std::uint64_t seed = 0;
  ConceptKind generator = ConceptKind::gaussian_clusters;
  DriftType drift_type = DriftType::sudden;
  int n_drifts = 0;
  bool recurring = false;
  int base_concepts = 0;        // recurring only; 0 = default (3)
  int centroids_per_class = 2;  // gaussian-clusters only
  double mix_window = 0.0;      // chunks; 0 = segment_length / 5

  void validate() const;  // throws std::invalid_argument
};

/// Per-chunk concept mixture. `concepts` is the base list; segment s
/// (between drift midpoints s-1 and s) draws from concepts[segment_concept[s]].
struct DriftSchedule {
  int n_chunks = 1;
  DriftType drift_type = DriftType::sudden;
  int n_drifts = 0;
  bool recurring = false;
  std::vector<ConceptParams> concepts;
  std::vector<int> segment_concept;  // n_drifts + 1 entries into concepts
  std::vector<double> midpoints;     // n_drifts transition chunk positions
  double mix_window = 1.0;           // transition half-width, in chunks

  /// Simplex weight vector over `concepts` at the given chunk.
  std::vector<double> mixture_weights(int chunk_index) const;

  /// (segment index s, fraction of the way into the transition toward
  /// segment s+1). Sudden schedules always return fraction 0 or map the
  /// chunk to the post-transition segment.
  std::pair<int, double> position(int chunk_index) const;
};

/// SEA concept: class 1 iff x0 + x1 <= theta. Throws on dim(x) < 2.
int sea_label(const std::vector<double>& x, double theta);

/// Hyperplane concept: class 1 iff sum(w_i x_i) > w0. Throws on dim mismatch.
int hyperplane_label(const std::vector<double>& x, const std::vector<double>& w, double w0);

/// Label of x under an arbitrary concept (gaussian-clusters uses the
/// nearest scale-normalized centroid).
int concept_label(const ConceptParams& c, const std::vector<double>& x);

/// Draws fresh concept parameters. `variant` selects the position in
/// deterministic per-kind cycles (the SEA theta cycle {8, 9, 7, 9.5}).
ConceptParams generate_concept(ConceptKind kind, int n_features, Rng& rng,
                               int centroids_per_class = 2, int variant = 0);

/// Linear interpolation between two structurally congruent concepts;
/// t = 0 returns exactly a.
ConceptParams interpolate_concepts(const ConceptParams& a, const ConceptParams& b, double t);

DriftSchedule build_drift_schedule(const StreamConfig& config, Rng& rng);

TabularChunk sample_chunk(const DriftSchedule& schedule, const StreamConfig& config,
                          int chunk_index, Rng& rng);

/// Delimited-text stream ingestion.
struct CsvStreamOptions {
  std::string path;
  int chunk_size = 0;
  std::string label_column;    // header name, or decimal column index
  std::string positive_class;  // raw cell value mapped to class 1
  char delimiter = ',';
  // When non-empty, any label cell outside this set is a parse error.
  std::vector<std::string> allowed_labels;
};

std::vector<TabularChunk> load_csv_stream(const CsvStreamOptions& options);

/// Read-only random access to the chunks of one stream. Implementations
/// are stateless per call and safe to share across threads.
struct ChunkSource {
  virtual ~ChunkSource() = default;
  virtual int n_chunks() const = 0;
  virtual int n_features() const = 0;
  virtual TabularChunk chunk(int chunk_index) const = 0;
};

class SyntheticSource final : public ChunkSource {
 public:
  explicit SyntheticSource(StreamConfig config);
  SyntheticSource(StreamConfig config, DriftSchedule schedule);

  int n_chunks() const override { return config_.n_chunks; }
  int n_features() const override { return config_.n_features; }
  TabularChunk chunk(int chunk_index) const override;

  const DriftSchedule& schedule() const { return schedule_; }
  const StreamConfig& config() const { return config_; }

 private:
  StreamConfig config_;
  DriftSchedule schedule_;
};

class MaterializedSource final : public ChunkSource {
 public:
  explicit MaterializedSource(std::vector<TabularChunk> chunks);

  int n_chunks() const override { return static_cast<int>(chunks_.size()); }
  int n_features() const override;
  TabularChunk chunk(int chunk_index) const override;

 private:
  std::vector<TabularChunk> chunks_;
};

}  // namespace sstml::streams

#endif
