#include "sstml/streams.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sstml::streams {

namespace {

constexpr int kMaxRejectionDraws = 100000;

// Logistic ramp rescaled to reach exactly 0 at u = -1 and 1 at u = +1,
// with value exactly 0.5 at u = 0. Exact endpoints are what makes a
// narrow-window gradual schedule coincide with the sudden one away from
// the midpoints.
double transition_ramp(double u) {
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double lo = 1.0 / (1.0 + std::exp(4.0));   // sigma(-4)
  const double hi = 1.0 / (1.0 + std::exp(-4.0));  // sigma(+4)
  const double s = 1.0 / (1.0 + std::exp(-4.0 * u));
  return (s - lo) / (hi - lo);
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<double> sample_features(const ConceptParams& c, int wanted_label, int n_features,
                                    Rng& rng) {
  std::vector<double> x(n_features);
  switch (c.kind) {
    case ConceptKind::gaussian_clusters: {
      std::vector<int> candidates;
      for (int i = 0; i < static_cast<int>(c.centroids.size()); ++i)
        if (c.centroids[i].label == wanted_label) candidates.push_back(i);
      if (candidates.empty())
        throw std::runtime_error("gaussian-clusters concept lacks a class-" +
                                 std::to_string(wanted_label) + " centroid");
      int pick = candidates[std::uniform_int_distribution<std::size_t>(
          0, candidates.size() - 1)(rng)];
      const auto& cen = c.centroids[pick];
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int j = 0; j < n_features; ++j) x[j] = cen.center[j] + cen.scale * gauss(rng);
      return x;
    }
    case ConceptKind::sea: {
      for (int attempt = 0; attempt < kMaxRejectionDraws; ++attempt) {
        for (int j = 0; j < n_features; ++j) x[j] = uniform(rng, 0.0, 10.0);
        if (sea_label(x, c.sea_theta) == wanted_label) return x;
      }
      break;
    }
    case ConceptKind::hyperplane: {
      for (int attempt = 0; attempt < kMaxRejectionDraws; ++attempt) {
        for (int j = 0; j < n_features; ++j) x[j] = uniform(rng, 0.0, 1.0);
        if (hyperplane_label(x, c.hyper_w, c.hyper_w0) == wanted_label) return x;
      }
      break;
    }
  }
  throw std::runtime_error("rejection sampling failed: concept cannot produce class " +
                           std::to_string(wanted_label));
}

}  // namespace

ConceptKind concept_kind_from_string(const std::string& s) {
  if (s == "gaussian-clusters" || s == "gaussian" || s == "rbf") {
    return ConceptKind::gaussian_clusters;
  }
  if (s == "sea") return ConceptKind::sea;
  if (s == "hyperplane") return ConceptKind::hyperplane;
  throw std::invalid_argument("invalid-config: unknown generator kind '" + s + "'");
}

DriftType drift_type_from_string(const std::string& s) {
  if (s == "sudden") return DriftType::sudden;
  if (s == "gradual") return DriftType::gradual;
  if (s == "incremental") return DriftType::incremental;
  throw std::invalid_argument("invalid-config: unknown drift type '" + s + "'");
}

std::string to_string(ConceptKind k) {
  switch (k) {
    case ConceptKind::gaussian_clusters: return "gaussian-clusters";
    case ConceptKind::sea: return "sea";
    case ConceptKind::hyperplane: return "hyperplane";
  }
  return "?";
}

std::string to_string(DriftType t) {
  switch (t) {
    case DriftType::sudden: return "sudden";
    case DriftType::gradual: return "gradual";
    case DriftType::incremental: return "incremental";
  }
  return "?";
}

void StreamConfig::validate() const {
  if (n_chunks < 1) throw std::invalid_argument("invalid-config: n_chunks must be >= 1");
  if (chunk_size < 1) throw std::invalid_argument("invalid-config: chunk_size must be >= 1");
  if (n_features < 1) throw std::invalid_argument("invalid-config: n_features must be >= 1");
  if (generator != ConceptKind::gaussian_clusters && n_features < 2)
    throw std::invalid_argument("invalid-config: sea/hyperplane need >= 2 features");
  if (!(minority_fraction > 0.0 && minority_fraction <= 0.5))
    throw std::invalid_argument("invalid-config: minority_fraction must be in (0, 0.5]");
  if (chunk_size * minority_fraction < 1.0)
    throw std::invalid_argument(
        "invalid-config: chunk_size * minority_fraction must be >= 1");
  if (!(label_noise >= 0.0 && label_noise < 0.5))
    throw std::invalid_argument("invalid-config: label_noise must be in [0, 0.5)");
  if (n_drifts < 0) throw std::invalid_argument("invalid-config: n_drifts must be >= 0");
  if (n_drifts >= n_chunks)
    throw std::invalid_argument("invalid-config: n_drifts must be < n_chunks");
  if (centroids_per_class < 1)
    throw std::invalid_argument("invalid-config: centroids_per_class must be >= 1");
  if (base_concepts < 0)
    throw std::invalid_argument("invalid-config: base_concepts must be >= 0");
  if (mix_window < 0.0)
    throw std::invalid_argument("invalid-config: mix_window must be >= 0");
}

int sea_label(const std::vector<double>& x, double theta) {
  if (x.size() < 2) throw std::invalid_argument("invalid-input: sea_label needs >= 2 features");
  return (x[0] + x[1] <= theta) ? 1 : 0;
}

int hyperplane_label(const std::vector<double>& x, const std::vector<double>& w, double w0) {
  if (x.size() != w.size())
    throw std::invalid_argument("invalid-input: hyperplane_label dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += w[i] * x[i];
  return (dot > w0) ? 1 : 0;
}

int concept_label(const ConceptParams& c, const std::vector<double>& x) {
  switch (c.kind) {
    case ConceptKind::sea: return sea_label(x, c.sea_theta);
    case ConceptKind::hyperplane: return hyperplane_label(x, c.hyper_w, c.hyper_w0);
    case ConceptKind::gaussian_clusters: {
      // Most likely centroid under equal priors.
      double best = std::numeric_limits<double>::infinity();
      int label = 0;
      for (const auto& cen : c.centroids) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
          double d = x[j] - cen.center[j];
          d2 += d * d;
        }
        double nll = d2 / (2.0 * cen.scale * cen.scale) +
                     static_cast<double>(x.size()) * std::log(cen.scale);
        if (nll < best) {
          best = nll;
          label = cen.label;
        }
      }
      return label;
    }
  }
  throw std::invalid_argument("invalid-config: unknown concept kind");
}

ConceptParams generate_concept(ConceptKind kind, int n_features, Rng& rng,
                               int centroids_per_class, int variant) {
  if (n_features < 2)
    throw std::invalid_argument("invalid-config: generate_concept needs n_features >= 2");
  ConceptParams c;
  c.kind = kind;
  switch (kind) {
    case ConceptKind::gaussian_clusters: {
      for (int label = 0; label <= 1; ++label) {
        for (int i = 0; i < centroids_per_class; ++i) {
          ConceptParams::Centroid cen;
          cen.label = label;
          cen.center.resize(n_features);
          for (int j = 0; j < n_features; ++j) cen.center[j] = uniform(rng, 0.0, 1.0);
          cen.scale = uniform(rng, 0.06, 0.15);
          c.centroids.push_back(std::move(cen));
        }
      }
      break;
    }
    case ConceptKind::sea: {
      static constexpr double kThetaCycle[4] = {8.0, 9.0, 7.0, 9.5};
      c.sea_theta = kThetaCycle[((variant % 4) + 4) % 4];
      break;
    }
    case ConceptKind::hyperplane: {
      c.hyper_w.resize(n_features);
      double sum = 0.0;
      bool nonzero = false;
      do {
        sum = 0.0;
        for (int j = 0; j < n_features; ++j) {
          c.hyper_w[j] = uniform(rng, -1.0, 1.0);
          sum += c.hyper_w[j];
          if (std::abs(c.hyper_w[j]) > 1e-9) nonzero = true;
        }
      } while (!nonzero);
      // Boundary through the hypercube center keeps both classes reachable.
      c.hyper_w0 = 0.5 * sum;
      break;
    }
  }
  return c;
}

ConceptParams interpolate_concepts(const ConceptParams& a, const ConceptParams& b, double t) {
  if (a.kind != b.kind)
    throw std::invalid_argument("invalid-input: cannot interpolate across concept kinds");
  ConceptParams out = a;
  switch (a.kind) {
    case ConceptKind::gaussian_clusters: {
      if (a.centroids.size() != b.centroids.size())
        throw std::invalid_argument("invalid-input: centroid counts differ");
      for (std::size_t i = 0; i < a.centroids.size(); ++i) {
        if (a.centroids[i].label != b.centroids[i].label)
          throw std::invalid_argument("invalid-input: centroid labels differ");
        auto& cen = out.centroids[i];
        for (std::size_t j = 0; j < cen.center.size(); ++j)
          cen.center[j] = (1.0 - t) * a.centroids[i].center[j] + t * b.centroids[i].center[j];
        cen.scale = (1.0 - t) * a.centroids[i].scale + t * b.centroids[i].scale;
      }
      break;
    }
    case ConceptKind::sea:
      out.sea_theta = (1.0 - t) * a.sea_theta + t * b.sea_theta;
      break;
    case ConceptKind::hyperplane: {
      if (a.hyper_w.size() != b.hyper_w.size())
        throw std::invalid_argument("invalid-input: hyperplane dimensions differ");
      for (std::size_t j = 0; j < a.hyper_w.size(); ++j)
        out.hyper_w[j] = (1.0 - t) * a.hyper_w[j] + t * b.hyper_w[j];
      out.hyper_w0 = (1.0 - t) * a.hyper_w0 + t * b.hyper_w0;
      break;
    }
  }
  return out;
}

std::pair<int, double> DriftSchedule::position(int chunk_index) const {
  if (n_drifts == 0) return {0, 0.0};
  if (drift_type == DriftType::sudden) {
    // Segment = number of midpoints already passed; no blending.
    int s = 0;
    while (s < n_drifts && midpoints[s] <= chunk_index) ++s;
    return {s, 0.0};
  }
  double p = 0.0;
  for (double m : midpoints) p += transition_ramp((chunk_index - m) / mix_window);
  int seg = std::min(static_cast<int>(p), n_drifts - 1);
  return {seg, p - seg};
}

std::vector<double> DriftSchedule::mixture_weights(int chunk_index) const {
  std::vector<double> w(concepts.size(), 0.0);
  auto [seg, frac] = position(chunk_index);
  w[segment_concept[seg]] += 1.0 - frac;
  if (frac > 0.0) w[segment_concept[seg + 1]] += frac;
  return w;
}

DriftSchedule build_drift_schedule(const StreamConfig& config, Rng& rng) {
  config.validate();
  DriftSchedule s;
  s.n_chunks = config.n_chunks;
  s.drift_type = config.drift_type;
  s.n_drifts = config.n_drifts;
  s.recurring = config.recurring;

  const int n_segments = config.n_drifts + 1;
  const int n_base = config.recurring
                         ? std::min(config.base_concepts > 0 ? config.base_concepts : 3,
                                    n_segments)
                         : n_segments;
  for (int i = 0; i < n_base; ++i)
    s.concepts.push_back(generate_concept(config.generator, config.n_features, rng,
                                          config.centroids_per_class, i));
  s.segment_concept.resize(n_segments);
  for (int seg = 0; seg < n_segments; ++seg)
    s.segment_concept[seg] = config.recurring ? seg % n_base : seg;

  // Drift midpoints at the centers of n_drifts equal spans of the stream.
  for (int i = 0; i < config.n_drifts; ++i)
    s.midpoints.push_back((2.0 * i + 1.0) * config.n_chunks / (2.0 * config.n_drifts));

  if (config.n_drifts > 0) {
    double segment_length = static_cast<double>(config.n_chunks) / config.n_drifts;
    s.mix_window = config.mix_window > 0.0 ? config.mix_window : segment_length / 5.0;
  }
  return s;
}

TabularChunk sample_chunk(const DriftSchedule& schedule, const StreamConfig& config,
                          int chunk_index, Rng& rng) {
  if (chunk_index < 0 || chunk_index >= schedule.n_chunks)
    throw std::out_of_range("out-of-range: chunk_index " + std::to_string(chunk_index) +
                            " not in [0, " + std::to_string(schedule.n_chunks) + ")");
  const int n = config.chunk_size;
  const int d = config.n_features;
  const int n_minority = static_cast<int>(n * config.minority_fraction);

  TabularChunk chunk;
  chunk.chunk_index = chunk_index;
  chunk.features = FeatureMatrix(n, d);
  chunk.labels.assign(n, 0);
  for (int i = 0; i < n_minority; ++i) chunk.labels[i] = 1;
  std::shuffle(chunk.labels.begin(), chunk.labels.end(), rng);

  const auto [seg, frac] = schedule.position(chunk_index);
  const ConceptParams* current = &schedule.concepts[schedule.segment_concept[seg]];
  const ConceptParams* next = nullptr;
  ConceptParams interpolated;
  if (schedule.n_drifts > 0 && frac > 0.0) {
    const ConceptParams& after = schedule.concepts[schedule.segment_concept[seg + 1]];
    if (schedule.drift_type == DriftType::incremental) {
      interpolated = interpolate_concepts(*current, after, frac);
      current = &interpolated;
    } else if (frac >= 1.0) {
      current = &after;  // transition complete: draw like the sudden case would
    } else {
      next = &after;
    }
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const ConceptParams* source = current;
    if (next != nullptr && unit(rng) < frac) source = next;
    std::vector<double> x = sample_features(*source, chunk.labels[i], d, rng);
    std::copy(x.begin(), x.end(), chunk.features.row(i));
  }

  const int n_flips = static_cast<int>(n * config.label_noise);
  if (n_flips > 0) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < n_flips; ++i) {
      int j = std::uniform_int_distribution<int>(i, n - 1)(rng);
      std::swap(order[i], order[j]);
    }
    for (int i = 0; i < n_flips; ++i) chunk.labels[order[i]] ^= 1;
  }
  return chunk;
}

SyntheticSource::SyntheticSource(StreamConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng rng = make_rng(config_.seed, fnv1a("schedule"));
  schedule_ = build_drift_schedule(config_, rng);
}

SyntheticSource::SyntheticSource(StreamConfig config, DriftSchedule schedule)
    : config_(std::move(config)), schedule_(std::move(schedule)) {
  config_.validate();
  if (schedule_.n_chunks != config_.n_chunks)
    throw std::invalid_argument("invalid-config: schedule/config chunk counts differ");
}

TabularChunk SyntheticSource::chunk(int chunk_index) const {
  Rng rng = make_rng(config_.seed, 0x10000ULL + static_cast<std::uint64_t>(chunk_index));
  return sample_chunk(schedule_, config_, chunk_index, rng);
}

MaterializedSource::MaterializedSource(std::vector<TabularChunk> chunks)
    : chunks_(std::move(chunks)) {
  if (chunks_.empty()) throw std::invalid_argument("invalid-input: empty chunk list");
}

int MaterializedSource::n_features() const {
  return static_cast<int>(chunks_.front().features.cols);
}

TabularChunk MaterializedSource::chunk(int chunk_index) const {
  if (chunk_index < 0 || chunk_index >= n_chunks())
    throw std::out_of_range("out-of-range: chunk_index");
  return chunks_[static_cast<std::size_t>(chunk_index)];
}

}  // namespace sstml::streams
