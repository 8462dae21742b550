#ifndef SSTML_EVALUATION_HPP
#define SSTML_EVALUATION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sstml/streams.hpp"
#include "sstml/types.hpp"

namespace sstml::evaluation {

// --- metrics ---

struct ConfusionMatrix {
  long long tp = 0, fn = 0, tn = 0, fp = 0;
  long long total() const { return tp + fn + tn + fp; }
};

/// Class 1 is the positive/minority class. Throws on length mismatch,
/// empty input, or labels outside {0,1}.
ConfusionMatrix confusion_counts(const std::vector<int>& y_true, const std::vector<int>& y_pred);

/// Metrics for one evaluated chunk. A 0/0 metric is left unset (excluded
/// from averages) rather than coerced to 0.
struct ChunkMetrics {
  int chunk_index = 0;
  std::optional<double> bac, recall, specificity, precision, f1, gmean;
  double encode_time_s = 0.0, train_time_s = 0.0, test_time_s = 0.0;
};

ChunkMetrics compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred);

enum class Metric { bac, recall, specificity, precision, f1, gmean };

std::optional<double> metric_value(const ChunkMetrics& m, Metric metric);

/// Mean over the chunks where the metric is defined; nullopt if none are.
std::optional<double> mean_metric(const std::vector<ChunkMetrics>& series, Metric metric);

// --- Test-Then-Train harness ---

/// Common method surface. Implementations must not read labels inside
/// predict; encoding methods report rasterization time via the drain so
/// the harness can split it out of the train/test phases.
struct StreamMethod {
  virtual ~StreamMethod() = default;
  virtual void learn_chunk(const TabularChunk& chunk) = 0;
  virtual std::vector<int> predict(const FeatureMatrix& features) = 0;
  /// Seconds spent encoding since the previous drain; 0 for non-encoding methods.
  virtual double drain_encode_seconds() { return 0.0; }
};

struct RunInfo {
  std::string method;
  std::string stream_id;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct RunResult {
  RunInfo info;
  std::vector<ChunkMetrics> series;  // chunks 1 .. n_chunks-1
};

/// Chunk 0 trains only; every later chunk is predicted, scored, then
/// trained on. Deterministic given seeds and a fixed thread count.
RunResult run_test_then_train(StreamMethod& method, const streams::ChunkSource& stream,
                              const RunInfo& info);

// --- series smoothing ---

/// Discrete Gaussian kernel truncated at 4*sigma, weights renormalized at
/// the boundaries; sigma = 0 is the identity.
std::vector<double> gaussian_smooth(const std::vector<double>& series, double sigma);

// --- Wilcoxon signed-rank test ---

struct WilcoxonResult {
  double statistic = 0.0;  // W = min(w_plus, w_minus)
  double w_plus = 0.0, w_minus = 0.0;
  int n_effective = 0;  // pairs left after zero differences are dropped
  double p_value = 1.0;
  double alpha = 0.05;
  bool significant = false;
  bool exact = false;  // exact enumeration (n_effective <= 25) vs normal approximation
};

/// Two-sided test on paired samples. Throws "insufficient-data" with
/// fewer than 5 nonzero differences.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b,
                                    double alpha = 0.05);

namespace detail {

/// Ranks 1..n ascending by value, ties resolved to the average rank.
std::vector<double> average_ranks(const std::vector<double>& values);

/// Exact two-sided p for statistic w under the signed-rank null, via
/// dynamic programming over the (doubled, integral) rank sums.
double wilcoxon_exact_p(const std::vector<double>& ranks, double w);

/// Normal approximation with tie and continuity corrections.
double wilcoxon_normal_p(const std::vector<double>& ranks, double w);

}  // namespace detail

// --- rank aggregation ---

struct RankTable {
  std::vector<double> average_rank;          // per method; larger = better
  std::vector<std::vector<int>> inferior;    // per method: significantly worse methods
  std::vector<std::vector<double>> p_value;  // pairwise, symmetric, diagonal 1
};

/// scores[method][stream]; per stream methods are ranked 1..M with the
/// best score getting the largest rank (ties averaged).
RankTable mean_ranks(const std::vector<std::vector<double>>& scores, double alpha = 0.05);

// --- per-run CSV ---

/// Fixed column order: chunk_index,bac,recall,specificity,precision,f1,
/// gmean,encode_time_s,train_time_s,test_time_s. Undefined metrics are
/// empty fields. Timing columns are zero-filled unless include_timings is
/// set, keeping reruns byte-identical.
void write_run_csv(const std::string& path, const RunResult& result, bool include_timings = false);

std::vector<ChunkMetrics> read_run_csv(const std::string& path);

}  // namespace sstml::evaluation

#endif
