#ifndef SSTML_BASELINES_HPP
#define SSTML_BASELINES_HPP

#include <memory>
#include <vector>

#include "sstml/random.hpp"
#include "sstml/types.hpp"

namespace sstml::baselines {

// --- Hoeffding tree with Hellinger split criterion ---

/// sqrt((sqrt(L1/T1)-sqrt(L0/T0))^2 + (sqrt(R1/T1)-sqrt(R0/T0))^2),
/// T_c the class-c total across both branches. Range [0, sqrt(2)].
/// Throws when a class is absent from both branches.
double hellinger_split_score(double l0, double l1, double r0, double r1);

/// epsilon = sqrt(range^2 * ln(1/delta) / (2n)).
double hoeffding_bound(double value_range, double delta, long long n);

struct HoeffdingConfig {
  int grace_period = 50;
  double delta = 1e-3;
  int max_depth = 20;
  double tie_threshold = 0.05;
  int histogram_bins = 10;
};

class HoeffdingTree {
 public:
  explicit HoeffdingTree(HoeffdingConfig config = {});

  void learn_chunk(const TabularChunk& chunk);
  void learn_instance(const double* x, int n_features, int label);
  std::vector<int> predict(const FeatureMatrix& features) const;
  int predict_one(const double* x, int n_features) const;

  int n_splits() const { return n_splits_; }
  int n_nodes() const { return static_cast<int>(nodes_.size()); }

 private:
  /// Equal-width histogram over a running range; expanding the range
  /// redistributes existing mass proportionally.
  struct Histogram {
    double lo = 0.0, hi = 0.0;
    bool seen = false;
    std::vector<double> counts[2];  // per class, histogram_bins entries

    void init(int bins);
    void add(double v, int label, int bins);
    void expand(double new_lo, double new_hi, int bins);
  };

  struct Node {
    bool is_leaf = true;
    int depth = 0;
    // internal
    int feature = -1;
    double threshold = 0.0;
    int left = -1, right = -1;
    // leaf
    double class_counts[2] = {0.0, 0.0};
    long long seen_since_attempt = 0;
    std::vector<Histogram> histograms;  // one per feature
  };

  int route(const double* x) const;
  void try_split(int node_index);

  HoeffdingConfig config_;
  std::vector<Node> nodes_;
  int n_features_ = -1;
  int n_splits_ = 0;
};

// --- SMOTE ---

struct SmoteResult {
  FeatureMatrix samples;
  bool duplicated = false;  // set by the <2-rows fallback
};

/// x_i + delta * (x_nn - x_i) on the segment between a minority point and
/// one of its k nearest minority neighbors.
inline void smote_point(const double* a, const double* b, double delta, int d, double* out) {
  for (int j = 0; j < d; ++j) out[j] = a[j] + delta * (b[j] - a[j]);
}

SmoteResult smote_oversample(const FeatureMatrix& minority, int k, int n_new, Rng& rng);

// --- CDS-style chunk ensemble ---

/// Weighted majority vote over binary member votes; ties toward class 0.
int weighted_vote(const int* votes, const double* weights, int n_members);

struct CdsConfig {
  int pool_size = 10;
  int smote_k = 5;
  double sigmoid_a = 0.5;    // error-discount slope
  double sigmoid_b = 10.0;   // error-discount offset, in chunks
  double error_floor = 1e-3;  // per-chunk errors clipped to [floor, 0.5]
  double max_weight = 10.0;
  HoeffdingConfig tree;
};

class CdsEnsemble {
 public:
  explicit CdsEnsemble(CdsConfig config = {});

  /// Trains one new member on the SMOTE-balanced chunk, re-evaluates every
  /// member on the raw chunk, refreshes NSE-style weights, evicts beyond
  /// pool_size.
  void learn_chunk(const TabularChunk& chunk, Rng& rng);
  std::vector<int> predict(const FeatureMatrix& features) const;

  int size() const { return static_cast<int>(members_.size()); }
  std::vector<double> weights() const;
  bool last_chunk_single_class() const { return last_chunk_single_class_; }

 private:
  struct Member {
    HoeffdingTree tree;
    int created_at = 0;
    std::vector<double> errors;  // clipped per-chunk error rates, oldest first
    double weight = 0.0;
  };

  CdsConfig config_;
  std::vector<Member> members_;
  int chunks_seen_ = 0;
  bool last_chunk_single_class_ = false;
};

}  // namespace sstml::baselines

#endif
