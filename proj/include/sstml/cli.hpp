#ifndef SSTML_CLI_HPP
#define SSTML_CLI_HPP

#include <memory>
#include <string>
#include <vector>

#include "sstml/baselines.hpp"
#include "sstml/evaluation.hpp"
#include "sstml/methods.hpp"
#include "sstml/streams.hpp"

namespace sstml::cli {

inline constexpr const char* kArtifactVersion = "sstml-bench 0.1.0";

struct StreamSpec {
  std::string id;
  bool is_csv = false;
  streams::StreamConfig synthetic;  // seed is overwritten per replication
  streams::CsvStreamOptions csv;
};

struct MethodSpec {
  std::string name;
  std::string type;  // sstml | hoeffding | cds | oracle
  methods::SstmlOptions sstml;
  baselines::HoeffdingConfig hoeffding;
  baselines::CdsConfig cds;
};

struct ExperimentConfig {
  std::string output_dir = "results";
  std::vector<std::uint64_t> seeds;
  double smoothing_sigma = 2.0;
  int threads = 0;  // 0 = unset; resolved against flag/env by the driver
  bool include_timings = false;
  std::vector<StreamSpec> streams;
  std::vector<MethodSpec> methods;
  std::string canonical_json;  // sorted-key dump backing the config hash

  void validate() const;  // throws "invalid-config: ..."
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Stream/method instances for one replication. Seeds are derived from
/// (replication seed, spec name) so methods never share generator state.
std::unique_ptr<streams::ChunkSource> make_source(const StreamSpec& spec, std::uint64_t rep_seed);
std::unique_ptr<evaluation::StreamMethod> make_method(const MethodSpec& spec, std::uint64_t rep_seed,
                                                      const streams::ChunkSource& source);

std::string run_csv_name(const std::string& method, const std::string& stream, std::uint64_t seed);

struct RunRecord {
  std::string method;
  std::string stream;
  std::uint64_t seed = 0;
  std::string csv;
  std::string status;  // "ok" | "failed"
  std::string error;
};

struct ExperimentReport {
  std::vector<RunRecord> runs;
  std::string manifest_path;
  std::string ranks_path;
};

/// Executes the full (method x stream x seed) grid sequentially, one CSV
/// per run; failures are recorded in the manifest and the grid continues.
/// Rerunning the same config yields byte-identical CSVs and rank report
/// (manifest timestamps excepted).
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Mean-BAC score matrix assembled from run CSVs (mean over a run's
/// series, then over seeds). Methods and streams are sorted by name.
struct GridScores {
  std::vector<std::string> methods;
  std::vector<std::string> streams;
  std::vector<std::vector<double>> scores;  // methods x streams
};

GridScores collect_scores(const std::vector<std::string>& csv_paths);

/// Average ranks (larger = better) plus pairwise Wilcoxon significance
/// when the grid is large enough (>= 2 methods, >= 5 streams).
void write_rank_report(const std::string& path, const GridScores& grid, double alpha = 0.05);

/// BAC-vs-chunk SVG, one smoothed mean-over-runs polyline per method.
void emit_plot(const std::vector<std::string>& csv_paths, double sigma, const std::string& out_path);

std::vector<std::string> list_run_csvs(const std::string& directory);

// --- timing benchmark ---

struct BenchSetting {
  int n_features = 0;
  int image_side = 0;
};

struct BenchConfig {
  std::vector<BenchSetting> grid{{8, 50}, {16, 80}, {32, 110}, {64, 150}};
  int n_chunks = 110;  // timed chunks; the stream carries one extra warm-only chunk
  int chunk_size = 250;
  int warmup = 10;  // leading timed chunks excluded from the statistics
  std::uint64_t seed = 1;
  std::vector<MethodSpec> methods;

  void validate() const;
};

BenchConfig parse_bench_config(const std::string& json_text);
BenchConfig load_bench_config(const std::string& path);

struct BenchRow {
  std::string method;
  int n_features = 0;
  int image_side = 0;
  int chunks_measured = 0;
  double mean_chunk_s = 0.0;
  double std_chunk_s = 0.0;
};

/// Sample mean and standard deviation of chunk_times[warmup:].
std::pair<double, double> mean_std_after_warmup(const std::vector<double>& chunk_times, int warmup);

std::vector<BenchRow> run_timing_benchmark(const BenchConfig& config);
void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

/// flag > config > SSTML_THREADS environment variable > 1.
int resolve_threads(int flag_value, int config_value);

}  // namespace sstml::cli

#endif
