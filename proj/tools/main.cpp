#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "sstml/cli.hpp"

namespace cli = sstml::cli;

namespace {

// exit 2: the invocation or config is wrong; exit 1: the machine failed us
int classify(const std::string& message) {
  for (const char* prefix : {"invalid-config", "parse-error", "invalid-input", "insufficient-data"})
    if (message.rfind(prefix, 0) == 0) return 2;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chunked-stream benchmark: image-encoded CNN vs tree baselines"};
  app.require_subcommand(1);

  std::string config_path;
  std::string results_dir;
  std::string out_path;
  std::string stream_filter;
  int threads = 0;
  bool timings = false;
  double sigma = 2.0;
  double alpha = 0.05;

  CLI::App* run = app.add_subcommand("run", "execute the method x stream x seed grid");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--threads", threads, "worker threads (overrides config and SSTML_THREADS)");
  run->add_flag("--timings", timings, "record per-chunk timings in the run CSVs");

  CLI::App* plot = app.add_subcommand("plot", "render a smoothed BAC-vs-chunk SVG");
  plot->add_option("results", results_dir, "directory holding run CSVs")->required();
  plot->add_option("--sigma", sigma, "gaussian smoothing sigma, in chunks");
  plot->add_option("--stream", stream_filter,
                   "only plot runs on this stream (needed when stream lengths differ)");
  plot->add_option("--out", out_path, "output SVG path (default <results>/bac.svg)");

  CLI::App* ranks = app.add_subcommand("ranks", "write the mean-rank / significance report");
  ranks->add_option("results", results_dir, "directory holding run CSVs")->required();
  ranks->add_option("--alpha", alpha, "significance level for pairwise tests");
  ranks->add_option("--out", out_path, "output JSON path (default <results>/ranks.json)");

  CLI::App* bench = app.add_subcommand("bench", "time per-chunk cost across the feature grid");
  bench->add_option("config", config_path, "benchmark config (JSON)")->required();
  bench->add_option("--out", out_path, "output CSV path (default bench.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*run) {
      cli::ExperimentConfig config = cli::load_config(config_path);
      config.threads = cli::resolve_threads(threads, config.threads);
      if (timings) config.include_timings = true;
      const cli::ExperimentReport report = cli::run_experiment(config);
      int failed = 0;
      for (const cli::RunRecord& r : report.runs) {
        std::printf("[%s] %s on %s seed %llu\n", r.status.c_str(), r.method.c_str(),
                    r.stream.c_str(), static_cast<unsigned long long>(r.seed));
        if (r.status != "ok") ++failed;
      }
      std::printf("%zu runs, ranks: %s, manifest: %s\n", report.runs.size(),
                  report.ranks_path.c_str(), report.manifest_path.c_str());
      if (failed > 0) {
        std::cerr << "error: " << failed << " run(s) failed; see " << report.manifest_path << "\n";
        return 1;
      }
    } else if (*plot) {
      if (out_path.empty()) out_path = results_dir + "/bac.svg";
      std::vector<std::string> csvs = cli::list_run_csvs(results_dir);
      if (!stream_filter.empty()) {
        const std::string tag = "__" + stream_filter + "__s";
        std::erase_if(csvs, [&](const std::string& p) { return p.find(tag) == std::string::npos; });
        if (csvs.empty())
          throw std::invalid_argument("invalid-input: no runs on stream '" + stream_filter + "'");
      }
      cli::emit_plot(csvs, sigma, out_path);
      std::printf("wrote %s\n", out_path.c_str());
    } else if (*ranks) {
      if (out_path.empty()) out_path = results_dir + "/ranks.json";
      cli::write_rank_report(out_path, cli::collect_scores(cli::list_run_csvs(results_dir)), alpha);
      std::printf("wrote %s\n", out_path.c_str());
    } else if (*bench) {
      const cli::BenchConfig config = cli::load_bench_config(config_path);
      const std::vector<cli::BenchRow> rows = cli::run_timing_benchmark(config);
      for (const cli::BenchRow& r : rows)
        std::printf("%-12s d=%-3d side=%-4d %.6f s/chunk (sd %.6f, n=%d)\n", r.method.c_str(),
                    r.n_features, r.image_side, r.mean_chunk_s, r.std_chunk_s, r.chunks_measured);
      if (out_path.empty()) out_path = "bench.csv";
      cli::write_bench_csv(out_path, rows);
      std::printf("wrote %s\n", out_path.c_str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e.what());
  }
  return 0;
}
