#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "sstml/streams.hpp"

using namespace sstml;
using namespace sstml::streams;

namespace {

StreamConfig base_config() {
  StreamConfig c;
  c.n_chunks = 100;
  c.chunk_size = 50;
  c.n_features = 4;
  c.minority_fraction = 0.1;
  c.seed = 42;
  c.generator = ConceptKind::gaussian_clusters;
  c.drift_type = DriftType::sudden;
  c.n_drifts = 3;
  return c;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    path = std::string("sstml_test_") + std::to_string(::getpid()) + ".csv";
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("sea_label thresholds on the first two attributes") {
  CHECK(sea_label({2.0, 3.0, 7.1}, 8.0) == 1);
  CHECK(sea_label({2.0, 3.0, 7.1}, 4.0) == 0);
  // Remaining attributes are irrelevant.
  CHECK(sea_label({2.0, 3.0, 0.0}, 8.0) == sea_label({2.0, 3.0, 9.9}, 8.0));
  CHECK_THROWS_AS(sea_label({1.0}, 8.0), std::invalid_argument);
}

TEST_CASE("hyperplane_label is a strict half-space test") {
  CHECK(hyperplane_label({0.3, 0.4}, {1.0, 1.0}, 1.0) == 0);
  CHECK(hyperplane_label({0.8, 0.4}, {1.0, 1.0}, 1.0) == 1);
  CHECK(hyperplane_label({0.5, 0.5}, {1.0, 1.0}, 1.0) == 0);  // boundary -> 0
  CHECK_THROWS_AS(hyperplane_label({0.3}, {1.0, 1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("sudden drift midpoints are evenly spaced segment centers") {
  StreamConfig c = base_config();
  c.n_chunks = 3000;
  c.n_drifts = 30;
  Rng rng = make_rng(c.seed, 0);
  DriftSchedule s = build_drift_schedule(c, rng);
  REQUIRE(s.midpoints.size() == 30);
  for (int i = 0; i < 30; ++i) CHECK(s.midpoints[i] == doctest::Approx(50.0 + 100.0 * i));
  // One-hot everywhere, stepping exactly at the midpoints.
  for (int k : {0, 49, 50, 149, 150, 2999}) {
    auto w = s.mixture_weights(k);
    int hot = 0;
    for (double wi : w) {
      CHECK((wi == 0.0 || wi == 1.0));
      hot += wi == 1.0;
    }
    CHECK(hot == 1);
  }
  CHECK(s.mixture_weights(49)[s.segment_concept[0]] == 1.0);
  CHECK(s.mixture_weights(50)[s.segment_concept[1]] == 1.0);
}

TEST_CASE("gradual mixture is exactly half/half at a midpoint and sums to one") {
  StreamConfig c = base_config();
  c.n_chunks = 100;
  c.n_drifts = 2;  // midpoints 25, 75
  c.drift_type = DriftType::gradual;
  Rng rng = make_rng(c.seed, 0);
  DriftSchedule s = build_drift_schedule(c, rng);
  auto w25 = s.mixture_weights(25);
  CHECK(w25[s.segment_concept[0]] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w25[s.segment_concept[1]] == doctest::Approx(0.5).epsilon(1e-12));
  for (int k = 0; k < c.n_chunks; ++k) {
    auto w = s.mixture_weights(k);
    double sum = 0.0;
    for (double wi : w) {
      CHECK(wi >= 0.0);
      sum += wi;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("recurring schedules cycle the base concepts") {
  StreamConfig c = base_config();
  c.n_chunks = 70;
  c.n_drifts = 6;
  c.recurring = true;
  c.base_concepts = 3;
  Rng rng = make_rng(c.seed, 0);
  DriftSchedule s = build_drift_schedule(c, rng);
  REQUIRE(s.concepts.size() == 3);
  std::vector<int> expect{0, 1, 2, 0, 1, 2, 0};
  CHECK(s.segment_concept == expect);
}

TEST_CASE("non-recurring schedules draw a fresh concept per segment") {
  StreamConfig c = base_config();
  c.n_drifts = 4;
  Rng rng = make_rng(c.seed, 0);
  DriftSchedule s = build_drift_schedule(c, rng);
  REQUIRE(s.concepts.size() == 5);
  std::vector<int> expect{0, 1, 2, 3, 4};
  CHECK(s.segment_concept == expect);
}

TEST_CASE("sample_chunk hits exact minority and noise counts") {
  StreamConfig c = base_config();
  c.chunk_size = 250;
  c.minority_fraction = 0.05;
  c.label_noise = 0.01;
  Rng srng = make_rng(c.seed, 0);
  DriftSchedule s = build_drift_schedule(c, srng);

  Rng rng1 = make_rng(c.seed, 1);
  c.label_noise = 0.0;
  TabularChunk clean = sample_chunk(s, c, 7, rng1);
  int minority = 0;
  for (int y : clean.labels) minority += y;
  CHECK(minority == 12);  // floor(250 * 0.05)

  c.label_noise = 0.01;
  Rng rng2 = make_rng(c.seed, 1);
  TabularChunk noisy = sample_chunk(s, c, 7, rng2);
  int flipped = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) flipped += clean.labels[i] != noisy.labels[i];
  CHECK(flipped == 2);  // floor(250 * 0.01)
  CHECK(clean.features.values == noisy.features.values);
}

TEST_CASE("sample_chunk is bit-identical for identical inputs") {
  StreamConfig c = base_config();
  for (ConceptKind kind :
       {ConceptKind::gaussian_clusters, ConceptKind::sea, ConceptKind::hyperplane}) {
    c.generator = kind;
    Rng srng = make_rng(c.seed, 0);
    DriftSchedule s = build_drift_schedule(c, srng);
    Rng a = make_rng(c.seed, 5), b = make_rng(c.seed, 5);
    TabularChunk ca = sample_chunk(s, c, 3, a);
    TabularChunk cb = sample_chunk(s, c, 3, b);
    CHECK(ca.labels == cb.labels);
    CHECK(ca.features.values == cb.features.values);
  }
}

TEST_CASE("generated labels match the generating concept for sea and hyperplane") {
  StreamConfig c = base_config();
  c.n_drifts = 0;
  c.label_noise = 0.0;
  for (ConceptKind kind : {ConceptKind::sea, ConceptKind::hyperplane}) {
    c.generator = kind;
    Rng srng = make_rng(c.seed, 0);
    DriftSchedule s = build_drift_schedule(c, srng);
    Rng rng = make_rng(c.seed, 2);
    TabularChunk chunk = sample_chunk(s, c, 0, rng);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      std::vector<double> x(chunk.features.row(i), chunk.features.row(i) + c.n_features);
      CHECK(concept_label(s.concepts[0], x) == chunk.labels[i]);
    }
  }
}

TEST_CASE("incremental interpolation endpoints are exact") {
  Rng rng = make_rng(7, 0);
  ConceptParams a = generate_concept(ConceptKind::gaussian_clusters, 3, rng);
  ConceptParams b = generate_concept(ConceptKind::gaussian_clusters, 3, rng);
  ConceptParams at0 = interpolate_concepts(a, b, 0.0);
  ConceptParams at1 = interpolate_concepts(a, b, 1.0);
  for (std::size_t i = 0; i < a.centroids.size(); ++i) {
    CHECK(at0.centroids[i].center == a.centroids[i].center);
    CHECK(at0.centroids[i].scale == a.centroids[i].scale);
    CHECK(at1.centroids[i].center == b.centroids[i].center);
  }
}

TEST_CASE("generate_concept is deterministic and class-complete") {
  Rng r1 = make_rng(11, 3), r2 = make_rng(11, 3);
  ConceptParams a = generate_concept(ConceptKind::gaussian_clusters, 5, r1);
  ConceptParams b = generate_concept(ConceptKind::gaussian_clusters, 5, r2);
  REQUIRE(a.centroids.size() == 4);  // 2 per class
  std::set<int> labels;
  for (const auto& cen : a.centroids) {
    labels.insert(cen.label);
    CHECK(cen.scale > 0.0);
    for (double v : cen.center) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  CHECK(labels == std::set<int>{0, 1});
  for (std::size_t i = 0; i < a.centroids.size(); ++i)
    CHECK(a.centroids[i].center == b.centroids[i].center);
}

TEST_CASE("narrow gradual windows reproduce the sudden stream away from midpoints") {
  StreamConfig sudden = base_config();
  sudden.n_chunks = 60;
  sudden.n_drifts = 2;  // midpoints 15, 45
  StreamConfig gradual = sudden;
  gradual.drift_type = DriftType::gradual;
  gradual.mix_window = 1.0;

  Rng r1 = make_rng(sudden.seed, 0);
  DriftSchedule ss = build_drift_schedule(sudden, r1);
  Rng r2 = make_rng(gradual.seed, 0);
  DriftSchedule gs = build_drift_schedule(gradual, r2);

  for (int k = 0; k < sudden.n_chunks; ++k) {
    bool near = std::abs(k - 15.0) < 1.0 || std::abs(k - 45.0) < 1.0;
    if (near) continue;
    Rng a = make_rng(1000, k), b = make_rng(1000, k);
    TabularChunk cs = sample_chunk(ss, sudden, k, a);
    TabularChunk cg = sample_chunk(gs, gradual, k, b);
    CHECK(cs.labels == cg.labels);
    CHECK(cs.features.values == cg.features.values);
  }
}

TEST_CASE("config validation rejects out-of-range fields") {
  StreamConfig c = base_config();
  c.n_drifts = c.n_chunks;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = base_config();
  c.minority_fraction = 0.6;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = base_config();
  c.minority_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = base_config();
  c.chunk_size = 5;
  c.minority_fraction = 0.1;  // 5 * 0.1 < 1
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = base_config();
  c.label_noise = 0.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("SyntheticSource chunks are reproducible and schedule-consistent") {
  StreamConfig c = base_config();
  SyntheticSource s1(c), s2(c);
  CHECK(s1.n_chunks() == c.n_chunks);
  CHECK(s1.n_features() == c.n_features);
  TabularChunk a = s1.chunk(9), b = s2.chunk(9);
  CHECK(a.chunk_index == 9);
  CHECK(a.labels == b.labels);
  CHECK(a.features.values == b.features.values);
  CHECK_THROWS_AS(s1.chunk(c.n_chunks), std::out_of_range);
}

TEST_CASE("load_csv_stream splits full chunks and binarizes labels") {
  std::string csv = "a,b,class\n";
  for (int i = 0; i < 1050; ++i)
    csv += std::to_string(i) + "," + std::to_string(i * 0.5) + "," + (i % 3 ? "neg" : "pos") +
           "\n";
  TempFile f(csv);

  CsvStreamOptions opt;
  opt.path = f.path;
  opt.chunk_size = 1000;
  opt.label_column = "class";
  opt.positive_class = "pos";
  auto chunks = load_csv_stream(opt);
  REQUIRE(chunks.size() == 1);  // 50 trailing rows dropped
  CHECK(chunks[0].size() == 1000);
  CHECK(chunks[0].features.cols == 2);
  CHECK(chunks[0].labels[0] == 1);
  CHECK(chunks[0].labels[1] == 0);
  CHECK(chunks[0].features.at(3, 1) == doctest::Approx(1.5));

  opt.chunk_size = 100;
  auto many = load_csv_stream(opt);
  CHECK(many.size() == 10);
  CHECK(many[9].chunk_index == 9);
}

TEST_CASE("load_csv_stream accepts a numeric label column index") {
  TempFile f("x,y,z\n1,2,3\n4,5,6\n");
  CsvStreamOptions opt;
  opt.path = f.path;
  opt.chunk_size = 2;
  opt.label_column = "1";  // column y
  opt.positive_class = "5";
  auto chunks = load_csv_stream(opt);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].labels == std::vector<int>{0, 1});
  CHECK(chunks[0].features.at(0, 1) == doctest::Approx(3.0));
}

TEST_CASE("load_csv_stream reports parse errors with row and column") {
  TempFile f("a,b,class\n1,2,pos\n1,oops,neg\n");
  CsvStreamOptions opt;
  opt.path = f.path;
  opt.chunk_size = 1;
  opt.label_column = "class";
  opt.positive_class = "pos";
  CHECK_THROWS_WITH_AS(load_csv_stream(opt), "parse-error: row 2, column b: 'oops' is not numeric",
                       std::runtime_error);

  opt.path = "no_such_file.csv";
  CHECK_THROWS_AS(load_csv_stream(opt), std::runtime_error);
}

TEST_CASE("load_csv_stream enforces the allowed-label policy") {
  TempFile f("a,b,class\n1,2,pos\n3,4,weird\n");
  CsvStreamOptions opt;
  opt.path = f.path;
  opt.chunk_size = 1;
  opt.label_column = "class";
  opt.positive_class = "pos";
  opt.allowed_labels = {"pos", "neg"};
  CHECK_THROWS_AS(load_csv_stream(opt), std::runtime_error);
}
