#include "sstml/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sstml::baselines {

double hellinger_split_score(double l0, double l1, double r0, double r1) {
  if (l0 < 0 || l1 < 0 || r0 < 0 || r1 < 0)
    throw std::invalid_argument("invalid-input: negative branch count");
  const double t0 = l0 + r0;
  const double t1 = l1 + r1;
  if (t0 <= 0.0 || t1 <= 0.0)
    throw std::invalid_argument("undefined-score: class absent from both branches");
  const double dl = std::sqrt(l1 / t1) - std::sqrt(l0 / t0);
  const double dr = std::sqrt(r1 / t1) - std::sqrt(r0 / t0);
  return std::sqrt(dl * dl + dr * dr);
}

double hoeffding_bound(double value_range, double delta, long long n) {
  if (!(value_range > 0.0) || !(delta > 0.0) || delta >= 1.0 || n <= 0)
    throw std::invalid_argument("invalid-input: hoeffding bound needs range>0, 0<delta<1, n>0");
  return std::sqrt(value_range * value_range * std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

void HoeffdingTree::Histogram::init(int bins) {
  counts[0].assign(static_cast<size_t>(bins), 0.0);
  counts[1].assign(static_cast<size_t>(bins), 0.0);
  seen = false;
  lo = hi = 0.0;
}

void HoeffdingTree::Histogram::expand(double new_lo, double new_hi, int bins) {
  // Redistribute the mass of each old bin over the new bins in proportion
  // to interval overlap.
  std::vector<double> fresh[2];
  fresh[0].assign(static_cast<size_t>(bins), 0.0);
  fresh[1].assign(static_cast<size_t>(bins), 0.0);
  const double old_width = (hi - lo) / bins;
  const double new_width = (new_hi - new_lo) / bins;
  for (int c = 0; c < 2; ++c) {
    for (int b = 0; b < bins; ++b) {
      const double mass = counts[c][static_cast<size_t>(b)];
      if (mass <= 0.0) continue;
      const double a0 = lo + b * old_width;
      const double a1 = a0 + old_width;
      int j0 = static_cast<int>((a0 - new_lo) / new_width);
      int j1 = static_cast<int>((a1 - new_lo) / new_width);
      j0 = std::clamp(j0, 0, bins - 1);
      j1 = std::clamp(j1, 0, bins - 1);
      for (int j = j0; j <= j1; ++j) {
        const double b0 = new_lo + j * new_width;
        const double overlap = std::min(a1, b0 + new_width) - std::max(a0, b0);
        if (overlap > 0.0) fresh[c][static_cast<size_t>(j)] += mass * overlap / old_width;
      }
    }
  }
  counts[0] = std::move(fresh[0]);
  counts[1] = std::move(fresh[1]);
  lo = new_lo;
  hi = new_hi;
}

void HoeffdingTree::Histogram::add(double v, int label, int bins) {
  if (!seen) {
    lo = hi = v;
    seen = true;
  } else if (v < lo || v > hi) {
    const double new_lo = std::min(lo, v);
    const double new_hi = std::max(hi, v);
    if (hi > lo)
      expand(new_lo, new_hi, bins);
    else {  // point mass so far: every old count belongs to one value
      const double width = (new_hi - new_lo) / bins;
      int at = std::clamp(static_cast<int>((lo - new_lo) / width), 0, bins - 1);
      for (int c = 0; c < 2; ++c) {
        double total = 0.0;
        for (double& m : counts[c]) {
          total += m;
          m = 0.0;
        }
        counts[c][static_cast<size_t>(at)] = total;
      }
      lo = new_lo;
      hi = new_hi;
    }
  }
  int b = 0;
  if (hi > lo) b = std::clamp(static_cast<int>((v - lo) / (hi - lo) * bins), 0, bins - 1);
  counts[label][static_cast<size_t>(b)] += 1.0;
}

HoeffdingTree::HoeffdingTree(HoeffdingConfig config) : config_(config) {
  if (config_.grace_period < 1 || config_.histogram_bins < 2 || config_.max_depth < 0 ||
      !(config_.delta > 0.0) || config_.delta >= 1.0 || config_.tie_threshold < 0.0)
    throw std::invalid_argument("invalid-config: hoeffding tree parameters");
  nodes_.push_back(Node{});
}

int HoeffdingTree::route(const double* x) const {
  int i = 0;
  while (!nodes_[static_cast<size_t>(i)].is_leaf) {
    const Node& n = nodes_[static_cast<size_t>(i)];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return i;
}

void HoeffdingTree::learn_instance(const double* x, int n_features, int label) {
  if (label != 0 && label != 1) throw std::invalid_argument("invalid-input: label must be 0 or 1");
  if (n_features_ < 0) n_features_ = n_features;
  if (n_features != n_features_)
    throw std::invalid_argument("invalid-input: feature count changed mid-stream");
  const int li = route(x);
  Node& leaf = nodes_[static_cast<size_t>(li)];
  if (leaf.histograms.empty()) {
    leaf.histograms.resize(static_cast<size_t>(n_features_));
    for (auto& h : leaf.histograms) h.init(config_.histogram_bins);
  }
  leaf.class_counts[label] += 1.0;
  for (int f = 0; f < n_features_; ++f)
    leaf.histograms[static_cast<size_t>(f)].add(x[f], label, config_.histogram_bins);
  if (++leaf.seen_since_attempt >= config_.grace_period) {
    leaf.seen_since_attempt = 0;
    try_split(li);
  }
}

void HoeffdingTree::learn_chunk(const TabularChunk& chunk) {
  const int n = static_cast<int>(chunk.features.rows);
  if (n == 0) throw std::invalid_argument("invalid-input: empty chunk");
  for (int i = 0; i < n; ++i)
    learn_instance(chunk.features.row(static_cast<size_t>(i)), static_cast<int>(chunk.features.cols),
                   chunk.labels[static_cast<size_t>(i)]);
}

void HoeffdingTree::try_split(int node_index) {
  Node& leaf = nodes_[static_cast<size_t>(node_index)];
  if (leaf.depth >= config_.max_depth) return;
  if (leaf.class_counts[0] <= 0.0 || leaf.class_counts[1] <= 0.0) return;
  const int bins = config_.histogram_bins;

  // Best candidate per feature, then best vs second best across features.
  double best = 0.0, second = 0.0;
  int best_feature = -1;
  double best_threshold = 0.0;
  for (int f = 0; f < n_features_; ++f) {
    const Histogram& h = leaf.histograms[static_cast<size_t>(f)];
    if (!h.seen || !(h.hi > h.lo)) continue;
    double feature_best = 0.0, feature_threshold = 0.0;
    double acc0 = 0.0, acc1 = 0.0;
    const double total0 = leaf.class_counts[0], total1 = leaf.class_counts[1];
    for (int e = 1; e < bins; ++e) {  // internal bin edges as thresholds
      acc0 += h.counts[0][static_cast<size_t>(e - 1)];
      acc1 += h.counts[1][static_cast<size_t>(e - 1)];
      // rebinning leaves sub-ulp residue; keep branch counts nonnegative
      const double r0 = std::max(0.0, total0 - acc0);
      const double r1 = std::max(0.0, total1 - acc1);
      const double score = hellinger_split_score(acc0, acc1, r0, r1);
      if (score > feature_best) {
        feature_best = score;
        feature_threshold = h.lo + (h.hi - h.lo) * e / bins;
      }
    }
    if (feature_best > best) {
      second = best;
      best = feature_best;
      best_feature = f;
      best_threshold = feature_threshold;
    } else if (feature_best > second) {
      second = feature_best;
    }
  }
  if (best_feature < 0 || best <= 0.0) return;

  const long long n_leaf = static_cast<long long>(leaf.class_counts[0] + leaf.class_counts[1]);
  const double eps = hoeffding_bound(std::sqrt(2.0), config_.delta, n_leaf);
  if (best - second <= eps && eps >= config_.tie_threshold) return;

  const int depth = leaf.depth;
  Node l, r;
  l.depth = r.depth = depth + 1;
  nodes_.push_back(l);
  nodes_.push_back(r);
  Node& parent = nodes_[static_cast<size_t>(node_index)];  // re-ref after push
  parent.is_leaf = false;
  parent.feature = best_feature;
  parent.threshold = best_threshold;
  parent.left = static_cast<int>(nodes_.size()) - 2;
  parent.right = static_cast<int>(nodes_.size()) - 1;
  parent.histograms.clear();
  parent.histograms.shrink_to_fit();
  ++n_splits_;
}

int HoeffdingTree::predict_one(const double* x, int n_features) const {
  if (n_features_ >= 0 && n_features != n_features_)
    throw std::invalid_argument("invalid-input: feature count mismatch");
  const Node& leaf = nodes_[static_cast<size_t>(n_features_ < 0 ? 0 : route(x))];
  return leaf.class_counts[1] > leaf.class_counts[0] ? 1 : 0;
}

std::vector<int> HoeffdingTree::predict(const FeatureMatrix& features) const {
  const int n = static_cast<int>(features.rows);
  std::vector<int> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<size_t>(i)] =
        predict_one(features.row(static_cast<size_t>(i)), static_cast<int>(features.cols));
  return out;
}

}  // namespace sstml::baselines
