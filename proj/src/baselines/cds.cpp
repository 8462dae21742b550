#include "sstml/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sstml::baselines {

SmoteResult smote_oversample(const FeatureMatrix& minority, int k, int n_new, Rng& rng) {
  if (k < 1) throw std::invalid_argument("invalid-input: smote k must be >= 1");
  if (n_new < 0) throw std::invalid_argument("invalid-input: smote n_new must be >= 0");
  const int m = static_cast<int>(minority.rows);
  const int d = static_cast<int>(minority.cols);
  SmoteResult result;
  result.samples = FeatureMatrix(n_new, d);
  if (n_new == 0) return result;
  if (m == 0) throw std::invalid_argument("invalid-input: smote needs at least one minority sample");
  if (m < 2) {
    result.duplicated = true;
    for (int s = 0; s < n_new; ++s)
      std::copy(minority.row(0), minority.row(0) + d, result.samples.row(s));
    return result;
  }

  const int n_neighbors = std::min(k, m - 1);
  // Nearest-neighbor lists per minority point, ties broken by index.
  std::vector<std::vector<int>> nearest(static_cast<size_t>(m));
  std::vector<std::pair<double, int>> dist(static_cast<size_t>(m - 1));
  for (int i = 0; i < m; ++i) {
    dist.clear();
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      double d2 = 0.0;
      const double* a = minority.row(i);
      const double* b = minority.row(j);
      for (int f = 0; f < d; ++f) {
        const double diff = a[f] - b[f];
        d2 += diff * diff;
      }
      dist.emplace_back(d2, j);
    }
    std::partial_sort(dist.begin(), dist.begin() + n_neighbors, dist.end());
    auto& list = nearest[static_cast<size_t>(i)];
    list.reserve(static_cast<size_t>(n_neighbors));
    for (int t = 0; t < n_neighbors; ++t) list.push_back(dist[static_cast<size_t>(t)].second);
  }

  std::uniform_int_distribution<int> pick_base(0, m - 1);
  std::uniform_int_distribution<int> pick_neighbor(0, n_neighbors - 1);
  std::uniform_real_distribution<double> pick_delta(0.0, 1.0);
  for (int s = 0; s < n_new; ++s) {
    const int i = pick_base(rng);
    const int j = nearest[static_cast<size_t>(i)][static_cast<size_t>(pick_neighbor(rng))];
    const double delta = pick_delta(rng);
    smote_point(minority.row(i), minority.row(j), delta, d, result.samples.row(s));
  }
  return result;
}

CdsEnsemble::CdsEnsemble(CdsConfig config) : config_(config) {
  if (config_.pool_size < 1 || config_.smote_k < 1 || !(config_.error_floor > 0.0) ||
      config_.error_floor > 0.5 || !(config_.max_weight > 0.0))
    throw std::invalid_argument("invalid-config: cds ensemble parameters");
}

void CdsEnsemble::learn_chunk(const TabularChunk& chunk, Rng& rng) {
  const int n = static_cast<int>(chunk.features.rows);
  const int d = static_cast<int>(chunk.features.cols);
  if (n == 0) throw std::invalid_argument("invalid-input: empty chunk");

  int count[2] = {0, 0};
  for (int y : chunk.labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("invalid-input: label must be 0 or 1");
    ++count[y];
  }
  last_chunk_single_class_ = count[0] == 0 || count[1] == 0;

  // Balance via SMOTE to class parity; a single-class chunk trains on raw data.
  TabularChunk train = chunk;
  if (!last_chunk_single_class_ && count[0] != count[1]) {
    const int minority = count[1] < count[0] ? 1 : 0;
    FeatureMatrix rows(count[minority], d);
    int at = 0;
    for (int i = 0; i < n; ++i)
      if (chunk.labels[static_cast<size_t>(i)] == minority)
        std::copy(chunk.features.row(i), chunk.features.row(i) + d, rows.row(at++));
    const int n_new = count[1 - minority] - count[minority];
    SmoteResult synth = smote_oversample(rows, config_.smote_k, n_new, rng);
    FeatureMatrix merged(n + n_new, d);
    std::copy(chunk.features.values.begin(), chunk.features.values.end(), merged.values.begin());
    std::copy(synth.samples.values.begin(), synth.samples.values.end(),
              merged.values.begin() + static_cast<size_t>(n) * d);
    train.features = std::move(merged);
    train.labels.resize(static_cast<size_t>(n + n_new), minority);
  }

  Member fresh;
  fresh.tree = HoeffdingTree(config_.tree);
  fresh.created_at = chunks_seen_;
  fresh.tree.learn_chunk(train);
  members_.push_back(std::move(fresh));

  // Evaluate everyone on the raw chunk with a class-balanced error rate
  // (plain error would zero out balance-trained members under heavy
  // imbalance); refresh NSE-style weights.
  for (Member& member : members_) {
    const std::vector<int> pred = member.tree.predict(chunk.features);
    double wrong[2] = {0.0, 0.0};
    for (int i = 0; i < n; ++i)
      if (pred[static_cast<size_t>(i)] != chunk.labels[static_cast<size_t>(i)])
        wrong[chunk.labels[static_cast<size_t>(i)]] += 1.0;
    double err;
    if (last_chunk_single_class_) {
      err = (wrong[0] + wrong[1]) / n;
    } else {
      err = 0.5 * (wrong[0] / count[0] + wrong[1] / count[1]);
    }
    member.errors.push_back(std::clamp(err, config_.error_floor, 0.5));

    double num = 0.0, den = 0.0;
    const int t = static_cast<int>(member.errors.size());
    for (int j = 0; j < t; ++j) {
      const int age = t - 1 - j;  // 0 = error on this chunk
      const double omega = 1.0 / (1.0 + std::exp(config_.sigmoid_a * (age - config_.sigmoid_b)));
      num += omega * member.errors[static_cast<size_t>(j)];
      den += omega;
    }
    const double mean_err = num / den;
    member.weight = std::clamp(std::log((1.0 - mean_err) / mean_err), 0.0, config_.max_weight);
  }

  if (static_cast<int>(members_.size()) > config_.pool_size) {
    auto victim = std::min_element(members_.begin(), members_.end(),
                                   [](const Member& a, const Member& b) { return a.weight < b.weight; });
    members_.erase(victim);
  }
  ++chunks_seen_;
}

int weighted_vote(const int* votes, const double* weights, int n_members) {
  if (n_members < 1) throw std::logic_error("invalid-state: empty ensemble");
  double tally[2] = {0.0, 0.0};
  for (int j = 0; j < n_members; ++j) {
    const int v = votes[j];
    if (v != 0 && v != 1) throw std::invalid_argument("invalid-input: vote must be 0 or 1");
    tally[v] += weights[j];
  }
  return tally[1] > tally[0] ? 1 : 0;
}

std::vector<int> CdsEnsemble::predict(const FeatureMatrix& features) const {
  if (members_.empty()) throw std::logic_error("invalid-state: empty ensemble");
  const int m = size();
  std::vector<int> votes(static_cast<size_t>(m));
  std::vector<double> w = weights();
  const int n = static_cast<int>(features.rows);
  std::vector<int> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j)
      votes[static_cast<size_t>(j)] = members_[static_cast<size_t>(j)].tree.predict_one(
          features.row(static_cast<size_t>(i)), static_cast<int>(features.cols));
    out[static_cast<size_t>(i)] = weighted_vote(votes.data(), w.data(), m);
  }
  return out;
}

std::vector<double> CdsEnsemble::weights() const {
  std::vector<double> out;
  out.reserve(members_.size());
  for (const Member& member : members_) out.push_back(member.weight);
  return out;
}

}  // namespace sstml::baselines
