#include "sstml/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sstml::evaluation {

ConfusionMatrix confusion_counts(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("invalid-input: label/prediction length mismatch");
  if (y_true.empty()) throw std::invalid_argument("invalid-input: empty label vectors");
  ConfusionMatrix c;
  for (size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1))
      throw std::invalid_argument("invalid-input: labels must be 0 or 1");
    if (t == 1)
      p == 1 ? ++c.tp : ++c.fn;
    else
      p == 0 ? ++c.tn : ++c.fp;
  }
  return c;
}

ChunkMetrics compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  const ConfusionMatrix c = confusion_counts(y_true, y_pred);
  ChunkMetrics m;
  if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / (c.tp + c.fn);
  if (c.tn + c.fp > 0) m.specificity = static_cast<double>(c.tn) / (c.tn + c.fp);
  if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
  if (m.recall && m.specificity) {
    m.bac = (*m.recall + *m.specificity) / 2.0;
    m.gmean = std::sqrt(*m.recall * *m.specificity);
  }
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  return m;
}

std::optional<double> metric_value(const ChunkMetrics& m, Metric metric) {
  switch (metric) {
    case Metric::bac: return m.bac;
    case Metric::recall: return m.recall;
    case Metric::specificity: return m.specificity;
    case Metric::precision: return m.precision;
    case Metric::f1: return m.f1;
    case Metric::gmean: return m.gmean;
  }
  throw std::logic_error("invalid-state: unknown metric");
}

std::optional<double> mean_metric(const std::vector<ChunkMetrics>& series, Metric metric) {
  double sum = 0.0;
  int defined = 0;
  for (const ChunkMetrics& m : series) {
    if (const std::optional<double> v = metric_value(m, metric)) {
      sum += *v;
      ++defined;
    }
  }
  if (defined == 0) return std::nullopt;
  return sum / defined;
}

RunResult run_test_then_train(StreamMethod& method, const streams::ChunkSource& stream,
                              const RunInfo& info) {
  using clock = std::chrono::steady_clock;
  const int n = stream.n_chunks();
  if (n < 2) throw std::invalid_argument("invalid-input: stream must have at least 2 chunks");

  RunResult result;
  result.info = info;
  result.series.reserve(static_cast<size_t>(n - 1));

  method.learn_chunk(stream.chunk(0));
  method.drain_encode_seconds();  // chunk 0 has no series row to carry it

  for (int k = 1; k < n; ++k) {
    const TabularChunk chunk = stream.chunk(k);

    const auto t0 = clock::now();
    const std::vector<int> pred = method.predict(chunk.features);
    const auto t1 = clock::now();
    const double encode_test = method.drain_encode_seconds();

    ChunkMetrics m = compute_metrics(chunk.labels, pred);
    m.chunk_index = k;

    const auto t2 = clock::now();
    method.learn_chunk(chunk);
    const auto t3 = clock::now();
    const double encode_train = method.drain_encode_seconds();

    const auto seconds = [](auto d) { return std::chrono::duration<double>(d).count(); };
    m.test_time_s = std::max(0.0, seconds(t1 - t0) - encode_test);
    m.train_time_s = std::max(0.0, seconds(t3 - t2) - encode_train);
    m.encode_time_s = encode_test + encode_train;
    result.series.push_back(m);
  }
  return result;
}

std::vector<double> gaussian_smooth(const std::vector<double>& series, double sigma) {
  if (series.empty()) throw std::invalid_argument("invalid-input: empty series");
  if (sigma < 0.0) throw std::invalid_argument("invalid-input: sigma must be >= 0");
  const int radius = static_cast<int>(std::lround(4.0 * sigma));
  if (sigma == 0.0 || radius == 0) return series;

  std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
  for (int o = -radius; o <= radius; ++o)
    kernel[static_cast<size_t>(o + radius)] = std::exp(-0.5 * o * o / (sigma * sigma));

  const int n = static_cast<int>(series.size());
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    const int lo = std::max(-radius, -i);
    const int hi = std::min(radius, n - 1 - i);
    for (int o = lo; o <= hi; ++o) {
      const double w = kernel[static_cast<size_t>(o + radius)];
      num += w * series[static_cast<size_t>(i + o)];
      den += w;
    }
    out[static_cast<size_t>(i)] = num / den;
  }
  return out;
}

namespace detail {

std::vector<double> average_ranks(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return values[static_cast<size_t>(a)] < values[static_cast<size_t>(b)];
  });
  std::vector<double> ranks(static_cast<size_t>(n));
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && values[static_cast<size_t>(order[static_cast<size_t>(j + 1)])] ==
                            values[static_cast<size_t>(order[static_cast<size_t>(i)])])
      ++j;
    const double shared = (i + j) / 2.0 + 1.0;  // ranks are 1-based
    for (int t = i; t <= j; ++t) ranks[static_cast<size_t>(order[static_cast<size_t>(t)])] = shared;
    i = j + 1;
  }
  return ranks;
}

double wilcoxon_exact_p(const std::vector<double>& ranks, double w) {
  const int n = static_cast<int>(ranks.size());
  // Doubling every rank makes all subset sums integral (average ranks are
  // half-integral); dp[t] counts sign assignments with doubled W+ equal t.
  long long max_t = 0;
  std::vector<long long> doubled(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    doubled[static_cast<size_t>(i)] = std::llround(2.0 * ranks[static_cast<size_t>(i)]);
    max_t += doubled[static_cast<size_t>(i)];
  }
  std::vector<double> dp(static_cast<size_t>(max_t + 1), 0.0);
  dp[0] = 1.0;
  for (int i = 0; i < n; ++i) {
    const long long r = doubled[static_cast<size_t>(i)];
    for (long long t = max_t; t >= r; --t) dp[static_cast<size_t>(t)] += dp[static_cast<size_t>(t - r)];
  }
  const long long cutoff = std::llround(2.0 * w + 1e-9);
  double below = 0.0;
  for (long long t = 0; t <= std::min(cutoff, max_t); ++t) below += dp[static_cast<size_t>(t)];
  const double p = 2.0 * below / std::pow(2.0, n);
  return std::min(1.0, p);
}

double wilcoxon_normal_p(const std::vector<double>& ranks, double w) {
  const double n = static_cast<double>(ranks.size());
  const double mu = n * (n + 1.0) / 4.0;
  double tie_term = 0.0;
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  const double z = (w - mu + 0.5) / std::sqrt(var);  // continuity toward the mean; w <= mu
  const double p = std::erfc(-z / std::sqrt(2.0));   // 2 * Phi(z)
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b,
                                    double alpha) {
  if (a.size() != b.size()) throw std::invalid_argument("invalid-input: paired samples differ in length");
  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  const int n = static_cast<int>(diffs.size());
  if (n < 5) throw std::invalid_argument("insufficient-data: fewer than 5 nonzero differences");

  std::vector<double> abs_d(diffs.size());
  for (size_t i = 0; i < diffs.size(); ++i) abs_d[i] = std::abs(diffs[i]);
  const std::vector<double> ranks = detail::average_ranks(abs_d);

  WilcoxonResult r;
  r.n_effective = n;
  r.alpha = alpha;
  for (size_t i = 0; i < diffs.size(); ++i)
    (diffs[i] > 0.0 ? r.w_plus : r.w_minus) += ranks[i];
  r.statistic = std::min(r.w_plus, r.w_minus);
  r.exact = n <= 25;
  r.p_value = r.exact ? detail::wilcoxon_exact_p(ranks, r.statistic)
                      : detail::wilcoxon_normal_p(ranks, r.statistic);
  r.significant = r.p_value < alpha;
  return r;
}

RankTable mean_ranks(const std::vector<std::vector<double>>& scores, double alpha) {
  const int methods = static_cast<int>(scores.size());
  if (methods < 2) throw std::invalid_argument("invalid-input: need at least 2 methods");
  const size_t streams = scores[0].size();
  if (streams < 5) throw std::invalid_argument("invalid-input: need at least 5 streams");
  for (const auto& row : scores)
    if (row.size() != streams) throw std::invalid_argument("invalid-input: ragged score matrix");

  RankTable table;
  table.average_rank.assign(static_cast<size_t>(methods), 0.0);
  for (size_t s = 0; s < streams; ++s) {
    std::vector<double> column(static_cast<size_t>(methods));
    for (int m = 0; m < methods; ++m) column[static_cast<size_t>(m)] = scores[static_cast<size_t>(m)][s];
    const std::vector<double> ranks = detail::average_ranks(column);
    for (int m = 0; m < methods; ++m)
      table.average_rank[static_cast<size_t>(m)] += ranks[static_cast<size_t>(m)];
  }
  for (double& r : table.average_rank) r /= static_cast<double>(streams);

  table.inferior.assign(static_cast<size_t>(methods), {});
  table.p_value.assign(static_cast<size_t>(methods),
                       std::vector<double>(static_cast<size_t>(methods), 1.0));
  for (int i = 0; i < methods; ++i) {
    for (int j = i + 1; j < methods; ++j) {
      double p = 1.0;
      bool significant = false;
      try {
        const WilcoxonResult w =
            wilcoxon_signed_rank(scores[static_cast<size_t>(i)], scores[static_cast<size_t>(j)], alpha);
        p = w.p_value;
        significant = w.significant;
      } catch (const std::invalid_argument&) {
        // all-zero differences: no evidence either way
      }
      table.p_value[static_cast<size_t>(i)][static_cast<size_t>(j)] = p;
      table.p_value[static_cast<size_t>(j)][static_cast<size_t>(i)] = p;
      if (significant) {
        const double ri = table.average_rank[static_cast<size_t>(i)];
        const double rj = table.average_rank[static_cast<size_t>(j)];
        if (ri > rj)
          table.inferior[static_cast<size_t>(i)].push_back(j);
        else if (rj > ri)
          table.inferior[static_cast<size_t>(j)].push_back(i);
      }
    }
  }
  return table;
}

namespace {

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *v);  // lossless double roundtrip
  return buf;
}

std::string format_time(double v, bool include) {
  if (!include) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

}  // namespace

void write_run_csv(const std::string& path, const RunResult& result, bool include_timings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("io-error: cannot open '" + path + "' for writing");
  out << "chunk_index,bac,recall,specificity,precision,f1,gmean,"
         "encode_time_s,train_time_s,test_time_s\n";
  for (const ChunkMetrics& m : result.series) {
    out << m.chunk_index << ',' << format_metric(m.bac) << ',' << format_metric(m.recall) << ','
        << format_metric(m.specificity) << ',' << format_metric(m.precision) << ','
        << format_metric(m.f1) << ',' << format_metric(m.gmean) << ','
        << format_time(m.encode_time_s, include_timings) << ','
        << format_time(m.train_time_s, include_timings) << ','
        << format_time(m.test_time_s, include_timings) << '\n';
  }
  if (!out) throw std::runtime_error("io-error: failed writing '" + path + "'");
}

std::vector<ChunkMetrics> read_run_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io-error: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("chunk_index,", 0) != 0)
    throw std::runtime_error("parse-error: '" + path + "' is not a run CSV");

  std::vector<ChunkMetrics> series;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) fields.push_back(field);
    while (fields.size() < 10) fields.emplace_back();  // trailing empties
    if (fields.size() != 10)
      throw std::runtime_error("parse-error: bad column count in '" + path + "'");

    const auto opt = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    ChunkMetrics m;
    m.chunk_index = std::stoi(fields[0]);
    m.bac = opt(fields[1]);
    m.recall = opt(fields[2]);
    m.specificity = opt(fields[3]);
    m.precision = opt(fields[4]);
    m.f1 = opt(fields[5]);
    m.gmean = opt(fields[6]);
    m.encode_time_s = std::stod(fields[7]);
    m.train_time_s = std::stod(fields[8]);
    m.test_time_s = std::stod(fields[9]);
    series.push_back(m);
  }
  return series;
}

}  // namespace sstml::evaluation
