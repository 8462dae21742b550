#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "sstml/encoder.hpp"
#include "sstml/random.hpp"

using namespace sstml;
using namespace sstml::encoder;

namespace {

std::vector<std::uint8_t> render(const std::vector<double>& x, const LayoutPlan& plan) {
  std::vector<std::uint8_t> img(static_cast<std::size_t>(plan.image_side) * plan.image_side);
  encode_instance(x, plan, GlyphFont::standard(), img.data());
  return img;
}

bool in_rect(const CellRect& r, int x, int y) {
  return x >= r.x && x < r.x + r.w && y >= r.y && y < r.y + r.h;
}

}  // namespace

TEST_CASE("plan_layout grid shape follows ceil(sqrt(n_features))") {
  LayoutPlan p8 = plan_layout(8, 50);
  CHECK(p8.grid_cols == 3);
  CHECK(p8.grid_rows == 3);
  CHECK(p8.cell_rects.size() == 8);

  LayoutPlan p64 = plan_layout(64, 150);
  CHECK(p64.grid_cols == 8);
  CHECK(p64.grid_rows == 8);

  CHECK_THROWS_WITH_AS(plan_layout(8, 6), doctest::Contains("layout-error"),
                       std::invalid_argument);
}

TEST_CASE("plan_layout covers the benchmark feature/side pairs") {
  for (auto [d, side] : std::vector<std::pair<int, int>>{{8, 50}, {16, 80}, {32, 110},
                                                         {64, 150}}) {
    LayoutPlan p = plan_layout(d, side);
    CHECK(p.glyph_scale >= 1);
    CHECK(p.grid_rows * p.grid_cols >= d);
    for (const CellRect& r : p.cell_rects) {
      CHECK(r.x + r.w <= side);
      CHECK(r.y + r.h <= side);
      // Cell holds the full character budget at the chosen scale.
      int per_row = r.w / (kGlyphWidth * p.glyph_scale);
      int rows = r.h / (kGlyphHeight * p.glyph_scale);
      CHECK(per_row * rows >= p.chars_per_cell);
    }
    // Disjoint cells.
    for (std::size_t a = 0; a < p.cell_rects.size(); ++a)
      for (std::size_t b = a + 1; b < p.cell_rects.size(); ++b) {
        const CellRect &ra = p.cell_rects[a], &rb = p.cell_rects[b];
        bool overlap = ra.x < rb.x + rb.w && rb.x < ra.x + ra.w && ra.y < rb.y + rb.h &&
                       rb.y < ra.y + ra.h;
        CHECK_FALSE(overlap);
      }
  }
}

TEST_CASE("plan_layout depends only on shape arguments") {
  LayoutPlan a = plan_layout(16, 80);
  LayoutPlan b = plan_layout(16, 80);
  CHECK(a.cell_rects == b.cell_rects);
  CHECK(a.glyph_scale == b.glyph_scale);
}

TEST_CASE("format_value truncates fixed point within the budget") {
  CHECK(format_value(0.123456, 4) == "0.12");
  CHECK(format_value(0.0, 4) == "0.00");
  CHECK(format_value(7.25, 5) == "7.250");
  CHECK(format_value(-9.99, 5) == "-9.99");
  CHECK(format_value(123.456, 5) == "123.4");
  CHECK(format_value(-123.9, 5) == "-123");
  CHECK(format_value(9999.0, 5) == "9999");
}

TEST_CASE("format_value falls back to scientific outside the fixed range") {
  CHECK(format_value(-12345.0, 4) == "-1e4");
  CHECK(format_value(12345.0, 5) == "1.2e4");
  CHECK(format_value(0.00001, 5) == "1e-5");
  CHECK(format_value(0.0004, 4) == "4e-4");
  CHECK_THROWS_AS(format_value(std::numeric_limits<double>::infinity(), 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(format_value(std::numeric_limits<double>::quiet_NaN(), 5),
                  std::invalid_argument);
}

TEST_CASE("format_value output always fits and uses only renderable characters") {
  Rng rng = make_rng(2024, 0);
  std::uniform_real_distribution<double> mag(-18.0, 18.0);
  std::uniform_int_distribution<int> cpc_dist(4, 8);
  for (int i = 0; i < 5000; ++i) {
    double v = std::copysign(std::pow(10.0, mag(rng)), mag(rng));
    int cpc = cpc_dist(rng);
    std::string s = format_value(v, cpc);
    CHECK(s.size() <= static_cast<std::size_t>(cpc));
    CHECK(!s.empty());
    for (char c : s) CHECK(std::string("0123456789.-e").find(c) != std::string::npos);
  }
}

TEST_CASE("encode_instance is deterministic, binary, and leaves used cells nonempty") {
  LayoutPlan plan = plan_layout(8, 50);
  std::vector<double> x{0.1, -0.25, 3.75, 9.0, 0.0, 1.5, -8.125, 0.666};
  auto img1 = render(x, plan);
  auto img2 = render(x, plan);
  CHECK(img1 == img2);

  std::size_t white = 0;
  for (std::uint8_t p : img1) {
    CHECK((p == 0 || p == 255));
    white += p == 255;
  }
  CHECK(white > 0);
  CHECK(white < img1.size() / 2);  // glyphs are sparse

  for (const CellRect& r : plan.cell_rects) {
    bool any = false;
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int xx = r.x; xx < r.x + r.w; ++xx)
        any = any || img1[static_cast<std::size_t>(y) * plan.image_side + xx] == 255;
    CHECK(any);
  }
}

TEST_CASE("changing one feature only repaints that feature's cell") {
  LayoutPlan plan = plan_layout(6, 60);
  Rng rng = make_rng(77, 0);
  std::uniform_real_distribution<double> unit(-5.0, 5.0);
  std::uniform_int_distribution<int> pick(0, 5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(6), y;
    for (double& v : x) v = unit(rng);
    y = x;
    int j = pick(rng);
    y[j] = unit(rng);

    auto ix = render(x, plan);
    auto iy = render(y, plan);
    const CellRect& cell = plan.cell_rects[j];
    bool differs_inside = false;
    for (int py = 0; py < plan.image_side; ++py)
      for (int px = 0; px < plan.image_side; ++px) {
        std::size_t idx = static_cast<std::size_t>(py) * plan.image_side + px;
        if (ix[idx] == iy[idx]) continue;
        CHECK(in_rect(cell, px, py));
        differs_inside = true;
      }
    bool strings_differ = format_value(x[j], plan.chars_per_cell) !=
                          format_value(y[j], plan.chars_per_cell);
    CHECK(differs_inside == strings_differ);
  }
}

TEST_CASE("encode_chunk maps every instance and copies labels") {
  TabularChunk chunk;
  chunk.chunk_index = 4;
  chunk.features = FeatureMatrix(250, 8);
  chunk.labels.resize(250);
  Rng rng = make_rng(5, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < 250; ++i) {
    chunk.labels[i] = i % 5 == 0;
    for (std::size_t j = 0; j < 8; ++j) chunk.features.at(i, j) = unit(rng);
  }

  LayoutPlan plan = plan_layout(8, 50);
  ImageChunk out = encode_chunk(chunk, plan, GlyphFont::standard());
  CHECK(out.count == 250);
  CHECK(out.side == 50);
  CHECK(out.chunk_index == 4);
  CHECK(out.labels == chunk.labels);

  std::vector<double> x0(chunk.features.row(0), chunk.features.row(0) + 8);
  auto direct = render(x0, plan);
  CHECK(std::equal(direct.begin(), direct.end(), out.image(0)));

  TabularChunk empty;
  CHECK_THROWS_AS(encode_chunk(empty, plan, GlyphFont::standard()), std::invalid_argument);
}

TEST_CASE("write_pgm emits a readable P5 file") {
  LayoutPlan plan = plan_layout(4, 40);
  auto img = render({1.0, 2.0, 3.0, 4.0}, plan);
  std::string path = "sstml_test_img.pgm";
  write_pgm(path, img.data(), plan.image_side);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxv = 0;
  in >> magic >> w >> h >> maxv;
  CHECK(magic == "P5");
  CHECK(w == 40);
  CHECK(h == 40);
  CHECK(maxv == 255);
  in.get();
  std::vector<std::uint8_t> body(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(body.data()), body.size());
  CHECK(static_cast<bool>(in));
  CHECK(std::equal(body.begin(), body.end(), img.begin()));
  std::remove(path.c_str());
}
