#include "sstml/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace sstml::cli {

namespace {

void expect_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; }))
      throw std::invalid_argument("invalid-config: unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("invalid-config: bad value for '") + key + "'");
  }
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    throw std::invalid_argument("invalid-config: missing '" + std::string(key) + "' in " + where);
  return j.at(key);
}

std::string clean_name(const json& j, const char* key, const std::string& where) {
  const std::string s = require(j, key, where).get<std::string>();
  if (s.empty() || s.find("__") != std::string::npos || s.find('/') != std::string::npos)
    throw std::invalid_argument("invalid-config: '" + s + "' is not a usable name (no '__' or '/')");
  return s;
}

baselines::HoeffdingConfig parse_hoeffding(const json& j, const std::string& where) {
  expect_keys(j, {"name", "type", "grace_period", "delta", "max_depth", "tie_threshold",
                  "histogram_bins"},
              where);
  baselines::HoeffdingConfig c;
  c.grace_period = get_or(j, "grace_period", c.grace_period);
  c.delta = get_or(j, "delta", c.delta);
  c.max_depth = get_or(j, "max_depth", c.max_depth);
  c.tie_threshold = get_or(j, "tie_threshold", c.tie_threshold);
  c.histogram_bins = get_or(j, "histogram_bins", c.histogram_bins);
  return c;
}

MethodSpec parse_method(const json& j) {
  MethodSpec spec;
  spec.name = clean_name(j, "name", "method");
  spec.type = get_or<std::string>(j, "type", spec.name);
  const std::string where = "method '" + spec.name + "'";
  if (spec.type == "sstml") {
    expect_keys(j, {"name", "type", "image_side", "chars_per_cell", "batch_size", "learning_rate",
                    "momentum", "variant", "normalization"},
                where);
    methods::SstmlOptions& o = spec.sstml;
    o.image_side = get_or(j, "image_side", o.image_side);
    o.chars_per_cell = get_or(j, "chars_per_cell", o.chars_per_cell);
    o.batch_size = get_or(j, "batch_size", o.batch_size);
    o.learning_rate = get_or(j, "learning_rate", o.learning_rate);
    o.momentum = get_or(j, "momentum", o.momentum);
    const std::string variant = get_or<std::string>(j, "variant", "compact");
    if (variant == "compact")
      o.variant = nn::Variant::compact;
    else if (variant == "resnet18")
      o.variant = nn::Variant::resnet18;
    else
      throw std::invalid_argument("invalid-config: unknown variant '" + variant + "'");
    const std::string norm = get_or<std::string>(j, "normalization", "batch");
    if (norm == "batch")
      o.normalization = nn::Normalization::batch;
    else if (norm == "none")
      o.normalization = nn::Normalization::none;
    else
      throw std::invalid_argument("invalid-config: unknown normalization '" + norm + "'");
  } else if (spec.type == "hoeffding") {
    spec.hoeffding = parse_hoeffding(j, where);
  } else if (spec.type == "cds") {
    expect_keys(j, {"name", "type", "pool_size", "smote_k", "sigmoid_a", "sigmoid_b", "error_floor",
                    "max_weight", "tree"},
                where);
    baselines::CdsConfig& c = spec.cds;
    c.pool_size = get_or(j, "pool_size", c.pool_size);
    c.smote_k = get_or(j, "smote_k", c.smote_k);
    c.sigmoid_a = get_or(j, "sigmoid_a", c.sigmoid_a);
    c.sigmoid_b = get_or(j, "sigmoid_b", c.sigmoid_b);
    c.error_floor = get_or(j, "error_floor", c.error_floor);
    c.max_weight = get_or(j, "max_weight", c.max_weight);
    if (j.contains("tree")) c.tree = parse_hoeffding(j.at("tree"), where + " tree");
  } else if (spec.type == "oracle") {
    expect_keys(j, {"name", "type"}, where);
  } else {
    throw std::invalid_argument("invalid-config: unknown method type '" + spec.type + "'");
  }
  return spec;
}

StreamSpec parse_stream(const json& j) {
  StreamSpec spec;
  spec.id = clean_name(j, "id", "stream");
  const std::string type = get_or<std::string>(j, "type", "synthetic");
  const std::string where = "stream '" + spec.id + "'";
  if (type == "synthetic") {
    expect_keys(j, {"id", "type", "n_chunks", "chunk_size", "n_features", "minority_fraction",
                    "label_noise", "generator", "drift_type", "n_drifts", "recurring",
                    "base_concepts", "centroids_per_class", "mix_window"},
                where);
    streams::StreamConfig& c = spec.synthetic;
    c.n_chunks = require(j, "n_chunks", where).get<int>();
    c.chunk_size = require(j, "chunk_size", where).get<int>();
    c.n_features = require(j, "n_features", where).get<int>();
    c.minority_fraction = get_or(j, "minority_fraction", c.minority_fraction);
    c.label_noise = get_or(j, "label_noise", c.label_noise);
    c.generator = streams::concept_kind_from_string(get_or<std::string>(j, "generator", "gaussian-clusters"));
    c.drift_type = streams::drift_type_from_string(get_or<std::string>(j, "drift_type", "sudden"));
    c.n_drifts = get_or(j, "n_drifts", c.n_drifts);
    c.recurring = get_or(j, "recurring", c.recurring);
    c.base_concepts = get_or(j, "base_concepts", c.base_concepts);
    c.centroids_per_class = get_or(j, "centroids_per_class", c.centroids_per_class);
    c.mix_window = get_or(j, "mix_window", c.mix_window);
    c.seed = 1;  // replaced per replication
    c.validate();
  } else if (type == "csv") {
    expect_keys(j, {"id", "type", "path", "chunk_size", "label_column", "positive_class",
                    "delimiter", "allowed_labels"},
                where);
    spec.is_csv = true;
    streams::CsvStreamOptions& c = spec.csv;
    c.path = require(j, "path", where).get<std::string>();
    c.chunk_size = require(j, "chunk_size", where).get<int>();
    c.label_column = require(j, "label_column", where).get<std::string>();
    c.positive_class = require(j, "positive_class", where).get<std::string>();
    const std::string delim = get_or<std::string>(j, "delimiter", ",");
    if (delim.size() != 1)
      throw std::invalid_argument("invalid-config: delimiter must be one character in " + where);
    c.delimiter = delim[0];
    c.allowed_labels = get_or(j, "allowed_labels", std::vector<std::string>{});
  } else {
    throw std::invalid_argument("invalid-config: unknown stream type '" + type + "'");
  }
  return spec;
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("parse-error: " + what + ": " + e.what());
  }
}

std::string timestamp_utc() {
  char buf[32];
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string hash_hex(const std::string& text) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("io-error: cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("io-error: failed writing '" + path + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (output_dir.empty()) throw std::invalid_argument("invalid-config: empty output_dir");
  if (streams.empty()) throw std::invalid_argument("invalid-config: at least one stream required");
  if (methods.empty()) throw std::invalid_argument("invalid-config: at least one method required");
  if (seeds.empty()) throw std::invalid_argument("invalid-config: at least one seed required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw std::invalid_argument("invalid-config: replication seeds must be distinct");
  if (smoothing_sigma < 0) throw std::invalid_argument("invalid-config: smoothing_sigma must be >= 0");
  if (threads < 0) throw std::invalid_argument("invalid-config: threads must be >= 1");
  std::set<std::string> names;
  for (const MethodSpec& m : methods)
    if (!names.insert(m.name).second)
      throw std::invalid_argument("invalid-config: duplicate method name '" + m.name + "'");
  names.clear();
  for (const StreamSpec& s : streams)
    if (!names.insert(s.id).second)
      throw std::invalid_argument("invalid-config: duplicate stream id '" + s.id + "'");
}

ExperimentConfig parse_config(const std::string& json_text) {
  const json j = parse_json_text(json_text, "config");
  if (!j.is_object()) throw std::invalid_argument("invalid-config: top level must be an object");
  expect_keys(j, {"schema_version", "output_dir", "seeds", "smoothing_sigma", "threads",
                  "include_timings", "streams", "methods"},
              "config");
  const int version = get_or(j, "schema_version", 1);
  if (version != 1)
    throw std::invalid_argument("invalid-config: unsupported schema_version " + std::to_string(version));

  ExperimentConfig config;
  config.output_dir = get_or<std::string>(j, "output_dir", config.output_dir);
  config.seeds = get_or(j, "seeds", std::vector<std::uint64_t>{1});
  config.smoothing_sigma = get_or(j, "smoothing_sigma", config.smoothing_sigma);
  config.threads = get_or(j, "threads", config.threads);
  config.include_timings = get_or(j, "include_timings", config.include_timings);
  for (const json& s : require(j, "streams", "config")) config.streams.push_back(parse_stream(s));
  for (const json& m : require(j, "methods", "config")) config.methods.push_back(parse_method(m));
  config.canonical_json = j.dump();
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io-error: cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::unique_ptr<streams::ChunkSource> make_source(const StreamSpec& spec, std::uint64_t rep_seed) {
  if (spec.is_csv)
    return std::make_unique<streams::MaterializedSource>(streams::load_csv_stream(spec.csv));
  streams::StreamConfig config = spec.synthetic;
  config.seed = derive_seed(rep_seed, fnv1a(spec.id));
  return std::make_unique<streams::SyntheticSource>(config);
}

std::unique_ptr<evaluation::StreamMethod> make_method(const MethodSpec& spec, std::uint64_t rep_seed,
                                                      const streams::ChunkSource& source) {
  const std::uint64_t seed = derive_seed(rep_seed, fnv1a(spec.name));
  if (spec.type == "sstml") {
    methods::SstmlOptions options = spec.sstml;
    options.seed = seed;
    return std::make_unique<methods::SstmlMethod>(options);
  }
  if (spec.type == "hoeffding") return std::make_unique<methods::HoeffdingMethod>(spec.hoeffding);
  if (spec.type == "cds") return std::make_unique<methods::CdsMethod>(spec.cds, seed);
  if (spec.type == "oracle") return std::make_unique<methods::OracleMethod>(source);
  throw std::invalid_argument("invalid-config: unknown method type '" + spec.type + "'");
}

std::string run_csv_name(const std::string& method, const std::string& stream, std::uint64_t seed) {
  return method + "__" + stream + "__s" + std::to_string(seed) + ".csv";
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  const std::string probe = (fs::path(config.output_dir) / ".write-probe").string();
  {
    std::ofstream test(probe, std::ios::binary);
    if (!test) throw std::runtime_error("io-error: output directory '" + config.output_dir +
                                        "' is not writable");
  }
  fs::remove(probe, ec);

  ExperimentReport report;
  std::vector<std::string> ok_csvs;
  const int threads = config.threads > 0 ? config.threads : 1;
  for (const MethodSpec& method_spec : config.methods) {
    for (const StreamSpec& stream_spec : config.streams) {
      for (const std::uint64_t seed : config.seeds) {
        RunRecord record;
        record.method = method_spec.name;
        record.stream = stream_spec.id;
        record.seed = seed;
        record.csv = run_csv_name(method_spec.name, stream_spec.id, seed);
        const std::string csv_path = (fs::path(config.output_dir) / record.csv).string();
        try {
          const std::unique_ptr<streams::ChunkSource> source = make_source(stream_spec, seed);
          const std::unique_ptr<evaluation::StreamMethod> method =
              make_method(method_spec, seed, *source);
          const evaluation::RunResult result = evaluation::run_test_then_train(
              *method, *source, {method_spec.name, stream_spec.id, seed, threads});
          evaluation::write_run_csv(csv_path, result, config.include_timings);
          record.status = "ok";
          ok_csvs.push_back(csv_path);
        } catch (const std::exception& e) {
          record.status = "failed";
          record.error = e.what();
        }
        report.runs.push_back(record);
      }
    }
  }

  report.ranks_path = (fs::path(config.output_dir) / "ranks.json").string();
  try {
    write_rank_report(report.ranks_path, collect_scores(ok_csvs));
  } catch (const std::exception& e) {
    json failure;
    failure["error"] = e.what();
    write_text(report.ranks_path, failure.dump(2) + "\n");
  }

  json manifest;
  manifest["artifact"] = kArtifactVersion;
  manifest["config_hash"] = hash_hex(config.canonical_json);
  manifest["generated_at"] = timestamp_utc();
  manifest["include_timings"] = config.include_timings;
  manifest["seeds"] = config.seeds;
  manifest["threads"] = threads;
  manifest["runs"] = json::array();
  for (const RunRecord& r : report.runs) {
    json row;
    row["method"] = r.method;
    row["stream"] = r.stream;
    row["seed"] = r.seed;
    row["csv"] = r.csv;
    row["status"] = r.status;
    if (!r.error.empty()) row["error"] = r.error;
    manifest["runs"].push_back(row);
  }
  report.manifest_path = (fs::path(config.output_dir) / "manifest.json").string();
  write_text(report.manifest_path, manifest.dump(2) + "\n");
  return report;
}

namespace {

struct RunName {
  std::string method, stream;
  std::uint64_t seed = 0;
};

RunName parse_run_name(const std::string& path) {
  const std::string base = fs::path(path).stem().string();
  const size_t a = base.find("__");
  const size_t b = base.rfind("__");
  if (a == std::string::npos || b == a || base.size() < b + 3 || base[b + 2] != 's')
    throw std::invalid_argument("parse-error: '" + path + "' is not a <method>__<stream>__s<seed>.csv name");
  RunName name;
  name.method = base.substr(0, a);
  name.stream = base.substr(a + 2, b - a - 2);
  name.seed = std::strtoull(base.c_str() + b + 3, nullptr, 10);
  return name;
}

}  // namespace

std::vector<std::string> list_run_csvs(const std::string& directory) {
  if (!fs::is_directory(directory))
    throw std::runtime_error("io-error: '" + directory + "' is not a directory");
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() == ".csv" && name.find("__") != std::string::npos)
      paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw std::runtime_error("io-error: no run CSVs found in '" + directory + "'");
  return paths;
}

GridScores collect_scores(const std::vector<std::string>& csv_paths) {
  if (csv_paths.empty()) throw std::invalid_argument("invalid-input: no run CSVs to score");
  // (method, stream) -> per-seed mean BAC
  std::map<std::string, std::map<std::string, std::vector<double>>> cell;
  for (const std::string& path : csv_paths) {
    const RunName name = parse_run_name(path);
    const std::vector<evaluation::ChunkMetrics> series = evaluation::read_run_csv(path);
    const std::optional<double> score = evaluation::mean_metric(series, evaluation::Metric::bac);
    if (!score)
      throw std::invalid_argument("invalid-input: '" + path + "' has no defined BAC values");
    cell[name.method][name.stream].push_back(*score);
  }

  GridScores grid;
  std::set<std::string> stream_set;
  for (const auto& [method, by_stream] : cell) {
    grid.methods.push_back(method);
    for (const auto& [stream, _] : by_stream) stream_set.insert(stream);
  }
  grid.streams.assign(stream_set.begin(), stream_set.end());
  for (const auto& [method, by_stream] : cell) {
    std::vector<double> row;
    for (const std::string& stream : grid.streams) {
      const auto it = by_stream.find(stream);
      if (it == by_stream.end() || it->second.empty())
        throw std::invalid_argument("invalid-input: method '" + method +
                                    "' has no runs on stream '" + stream + "'");
      double sum = 0.0;
      for (double v : it->second) sum += v;
      row.push_back(sum / static_cast<double>(it->second.size()));
    }
    grid.scores.push_back(std::move(row));
  }
  return grid;
}

void write_rank_report(const std::string& path, const GridScores& grid, double alpha) {
  const int methods = static_cast<int>(grid.methods.size());
  const int streams = static_cast<int>(grid.streams.size());
  json report;
  report["alpha"] = alpha;
  report["score"] = "mean_bac";
  report["methods"] = grid.methods;
  report["streams"] = grid.streams;
  report["scores"] = grid.scores;

  std::vector<double> average(static_cast<size_t>(methods), 1.0);
  std::vector<std::vector<int>> inferior(static_cast<size_t>(methods));
  bool tested = false;
  if (methods >= 2 && streams >= 5) {
    const evaluation::RankTable table = evaluation::mean_ranks(grid.scores, alpha);
    average = table.average_rank;
    inferior = table.inferior;
    report["p_values"] = table.p_value;
    tested = true;
  } else if (methods >= 2) {
    // grid too small for significance; report average ranks only
    std::fill(average.begin(), average.end(), 0.0);
    for (int s = 0; s < streams; ++s) {
      std::vector<double> column(static_cast<size_t>(methods));
      for (int m = 0; m < methods; ++m)
        column[static_cast<size_t>(m)] = grid.scores[static_cast<size_t>(m)][static_cast<size_t>(s)];
      const std::vector<double> ranks = evaluation::detail::average_ranks(column);
      for (int m = 0; m < methods; ++m) average[static_cast<size_t>(m)] += ranks[static_cast<size_t>(m)];
    }
    for (double& r : average) r /= std::max(1, streams);
  }
  report["average_ranks"] = average;
  report["significantly_inferior"] = inferior;
  report["significance_tested"] = tested;
  write_text(path, report.dump(2) + "\n");
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

std::vector<double> fill_gaps(const std::vector<std::optional<double>>& v, const std::string& what) {
  std::optional<double> first;
  for (const auto& x : v)
    if (x) {
      first = x;
      break;
    }
  if (!first) throw std::invalid_argument("invalid-input: no defined BAC values in " + what);
  // forward fill; the leading gap takes the first defined value
  std::vector<double> out(v.size());
  double last = *first;
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i]) last = *v[i];
    out[i] = last;
  }
  return out;
}

}  // namespace

void emit_plot(const std::vector<std::string>& csv_paths, double sigma, const std::string& out_path) {
  if (csv_paths.empty()) throw std::invalid_argument("invalid-input: no result series to plot");
  std::map<std::string, std::vector<std::vector<std::optional<double>>>> by_method;
  std::vector<int> chunk_axis;
  size_t length = 0;
  std::string first_file;
  std::vector<std::string> mismatched;
  for (const std::string& path : csv_paths) {
    const RunName name = parse_run_name(path);
    const std::vector<evaluation::ChunkMetrics> series = evaluation::read_run_csv(path);
    if (series.empty()) throw std::invalid_argument("invalid-input: empty series in '" + path + "'");
    if (length == 0) {
      length = series.size();
      first_file = path;
      chunk_axis.reserve(length);
      for (const auto& m : series) chunk_axis.push_back(m.chunk_index);
    } else if (series.size() != length) {
      mismatched.push_back(path);
      continue;
    }
    std::vector<std::optional<double>> bac(series.size());
    for (size_t i = 0; i < series.size(); ++i) bac[i] = series[i].bac;
    by_method[name.method].push_back(std::move(bac));
  }
  if (!mismatched.empty()) {
    std::string msg = "invalid-input: series length differs from '" + first_file + "' in:";
    for (const std::string& f : mismatched) msg += " '" + f + "'";
    throw std::invalid_argument(msg);
  }

  const double width = 880, height = 480;
  const double left = 60, right = 700, top = 20, bottom = 430;
  const auto x_at = [&](size_t i) {
    if (length == 1) return (left + right) / 2.0;
    return left + (right - left) * static_cast<double>(i) / static_cast<double>(length - 1);
  };
  const auto y_at = [&](double v) { return bottom - (bottom - top) * v; };
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n"
      << "  <line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
      << bottom << "\" stroke=\"black\"/>\n"
      << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = t / 4.0;
    char label[16];
    std::snprintf(label, sizeof label, "%.2f", v);
    svg << "  <line x1=\"" << left - 4 << "\" y1=\"" << y_at(v) << "\" x2=\"" << left << "\" y2=\""
        << y_at(v) << "\" stroke=\"black\"/>\n"
        << "  <text x=\"" << left - 8 << "\" y=\"" << y_at(v) + 4
        << "\" font-size=\"12\" text-anchor=\"end\">" << label << "</text>\n";
    const size_t i = static_cast<size_t>(std::lround(v * static_cast<double>(length - 1)));
    svg << "  <line x1=\"" << x_at(i) << "\" y1=\"" << bottom << "\" x2=\"" << x_at(i) << "\" y2=\""
        << bottom + 4 << "\" stroke=\"black\"/>\n"
        << "  <text x=\"" << x_at(i) << "\" y=\"" << bottom + 18
        << "\" font-size=\"12\" text-anchor=\"middle\">" << chunk_axis[i] << "</text>\n";
  }
  svg << "  <text x=\"" << (left + right) / 2 << "\" y=\"" << bottom + 38
      << "\" font-size=\"14\" text-anchor=\"middle\">chunk</text>\n"
      << "  <text x=\"18\" y=\"" << (top + bottom) / 2
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (top + bottom) / 2 << ")\">BAC</text>\n";

  int color = 0;
  double legend_y = top + 14;
  for (const auto& [method, runs] : by_method) {
    std::vector<std::optional<double>> mean(length);
    for (size_t i = 0; i < length; ++i) {
      double sum = 0.0;
      int defined = 0;
      for (const auto& run : runs)
        if (run[i]) {
          sum += *run[i];
          ++defined;
        }
      if (defined > 0) mean[i] = sum / defined;
    }
    const std::vector<double> smoothed =
        evaluation::gaussian_smooth(fill_gaps(mean, "method '" + method + "'"), sigma);
    const char* stroke = palette[color % 8];
    svg << "  <polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < length; ++i) {
      char point[48];
      std::snprintf(point, sizeof point, "%.2f,%.2f ", x_at(i), y_at(smoothed[i]));
      svg << point;
    }
    svg << "\"/>\n"
        << "  <line x1=\"" << right + 16 << "\" y1=\"" << legend_y - 4 << "\" x2=\"" << right + 44
        << "\" y2=\"" << legend_y - 4 << "\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"/>\n"
        << "  <text x=\"" << right + 50 << "\" y=\"" << legend_y << "\" font-size=\"13\">"
        << xml_escape(method) << "</text>\n";
    ++color;
    legend_y += 18;
  }
  svg << "</svg>\n";
  write_text(out_path, svg.str());
}

// --- timing benchmark ---

void BenchConfig::validate() const {
  if (grid.empty()) throw std::invalid_argument("invalid-config: empty benchmark grid");
  for (const BenchSetting& s : grid)
    if (s.n_features < 1 || s.image_side < 16)
      throw std::invalid_argument("invalid-config: benchmark setting needs n_features >= 1 and image_side >= 16");
  if (warmup < 0) throw std::invalid_argument("invalid-config: warmup must be >= 0");
  if (n_chunks <= warmup)
    throw std::invalid_argument("invalid-config: n_chunks must exceed warmup");
  if (chunk_size < 1) throw std::invalid_argument("invalid-config: chunk_size must be >= 1");
  if (methods.empty()) throw std::invalid_argument("invalid-config: at least one method required");
}

BenchConfig parse_bench_config(const std::string& json_text) {
  const json j = parse_json_text(json_text, "bench config");
  expect_keys(j, {"feature_counts", "image_sides", "n_chunks", "chunk_size", "warmup", "seed",
                  "methods"},
              "bench config");
  BenchConfig config;
  const std::vector<int> counts = get_or(j, "feature_counts", std::vector<int>{8, 16, 32, 64});
  const std::vector<int> sides = get_or(j, "image_sides", std::vector<int>{50, 80, 110, 150});
  if (counts.size() != sides.size())
    throw std::invalid_argument("invalid-config: feature_counts and image_sides must align");
  config.grid.clear();
  for (size_t i = 0; i < counts.size(); ++i) config.grid.push_back({counts[i], sides[i]});
  config.n_chunks = get_or(j, "n_chunks", config.n_chunks);
  config.chunk_size = get_or(j, "chunk_size", config.chunk_size);
  config.warmup = get_or(j, "warmup", config.warmup);
  config.seed = get_or(j, "seed", config.seed);
  if (j.contains("methods")) {
    for (const json& m : j.at("methods")) config.methods.push_back(parse_method(m));
  } else {
    MethodSpec sstml;
    sstml.name = sstml.type = "sstml";
    MethodSpec ht;
    ht.name = ht.type = "hoeffding";
    MethodSpec cds;
    cds.name = cds.type = "cds";
    config.methods = {sstml, ht, cds};
  }
  config.validate();
  return config;
}

BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io-error: cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_bench_config(buffer.str());
}

std::pair<double, double> mean_std_after_warmup(const std::vector<double>& chunk_times, int warmup) {
  const int n = static_cast<int>(chunk_times.size()) - warmup;
  if (warmup < 0 || n < 1)
    throw std::invalid_argument("invalid-input: need at least one chunk after warm-up");
  double sum = 0.0;
  for (int i = warmup; i < static_cast<int>(chunk_times.size()); ++i)
    sum += chunk_times[static_cast<size_t>(i)];
  const double mean = sum / n;
  if (n == 1) return {mean, 0.0};
  double ss = 0.0;
  for (int i = warmup; i < static_cast<int>(chunk_times.size()); ++i) {
    const double d = chunk_times[static_cast<size_t>(i)] - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / (n - 1))};
}

std::vector<BenchRow> run_timing_benchmark(const BenchConfig& config) {
  config.validate();
  std::vector<BenchRow> rows;
  for (const BenchSetting& setting : config.grid) {
    streams::StreamConfig stream;
    stream.n_chunks = config.n_chunks + 1;  // chunk 0 is train-only, leaving n_chunks timed rows
    stream.chunk_size = config.chunk_size;
    stream.n_features = setting.n_features;
    // keep at least one minority instance per chunk at small chunk sizes
    stream.minority_fraction = std::max(0.1, 1.0 / config.chunk_size);
    stream.seed = derive_seed(config.seed, fnv1a("bench-" + std::to_string(setting.n_features)));
    const streams::SyntheticSource source(stream);

    for (const MethodSpec& spec : config.methods) {
      MethodSpec sized = spec;
      sized.sstml.image_side = setting.image_side;
      const std::unique_ptr<evaluation::StreamMethod> method =
          make_method(sized, config.seed, source);
      const evaluation::RunResult result = evaluation::run_test_then_train(
          *method, source, {spec.name, "bench", config.seed, 1});
      std::vector<double> chunk_times;
      chunk_times.reserve(result.series.size());
      for (const evaluation::ChunkMetrics& m : result.series)
        chunk_times.push_back(m.encode_time_s + m.train_time_s + m.test_time_s);
      const auto [mean, sd] = mean_std_after_warmup(chunk_times, config.warmup);
      BenchRow row;
      row.method = spec.name;
      row.n_features = setting.n_features;
      row.image_side = setting.image_side;
      row.chunks_measured = static_cast<int>(chunk_times.size()) - config.warmup;
      row.mean_chunk_s = mean;
      row.std_chunk_s = sd;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "method,n_features,image_side,chunks_measured,mean_chunk_s,std_chunk_s\n";
  for (const BenchRow& r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f,%.9f", r.mean_chunk_s, r.std_chunk_s);
    out << r.method << ',' << r.n_features << ',' << r.image_side << ',' << r.chunks_measured
        << ',' << buf << '\n';
  }
  write_text(path, out.str());
}

int resolve_threads(int flag_value, int config_value) {
  if (flag_value > 0) return flag_value;
  if (config_value > 0) return config_value;
  if (const char* env = std::getenv("SSTML_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(v);
  }
  return 1;
}

}  // namespace sstml::cli
