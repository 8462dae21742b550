#include "sstml/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sstml::encoder {

namespace {

constexpr const char* kCharset = "0123456789.-e";

int char_index(char c) {
  const char* p = std::strchr(kCharset, c);
  if (p == nullptr || c == '\0')
    throw std::invalid_argument(std::string("invalid-input: no glyph for '") + c + "'");
  return static_cast<int>(p - kCharset);
}

// Glyphs a cell can hold at the given scale, packed edge to edge and
// wrapped into text rows.
int cell_capacity(int cell_w, int cell_h, int scale) {
  return (cell_w / (kGlyphWidth * scale)) * (cell_h / (kGlyphHeight * scale));
}

}  // namespace

const GlyphFont& GlyphFont::standard() {
  static const GlyphFont font{{{
      {{0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e}},  // 0
      {{0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e}},  // 1
      {{0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f}},  // 2
      {{0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e}},  // 3
      {{0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02}},  // 4
      {{0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e}},  // 5
      {{0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e}},  // 6
      {{0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},  // 7
      {{0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e}},  // 8
      {{0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c}},  // 9
      {{0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c}},  // .
      {{0x00, 0x00, 0x00, 0x1f, 0x00, 0x00, 0x00}},  // -
      {{0x00, 0x00, 0x0e, 0x11, 0x1f, 0x10, 0x0e}},  // e
  }}};
  return font;
}

const std::array<std::uint8_t, kGlyphHeight>& GlyphFont::glyph(char c) const {
  return rows[char_index(c)];
}

LayoutPlan plan_layout(int n_features, int image_side, int chars_per_cell) {
  if (n_features < 1) throw std::invalid_argument("invalid-config: n_features must be >= 1");
  if (chars_per_cell < 4)
    throw std::invalid_argument("invalid-config: chars_per_cell must be >= 4");

  LayoutPlan plan;
  plan.image_side = image_side;
  plan.chars_per_cell = chars_per_cell;
  plan.grid_cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_features))));
  plan.grid_rows = (n_features + plan.grid_cols - 1) / plan.grid_cols;

  const int cell_w = image_side / plan.grid_cols;
  const int cell_h = image_side / plan.grid_rows;
  if (cell_capacity(cell_w, cell_h, 1) < chars_per_cell)
    throw std::invalid_argument(
        "layout-error: " + std::to_string(image_side) + " px cannot hold " +
        std::to_string(chars_per_cell) + " glyphs per cell for " + std::to_string(n_features) +
        " features; increase image_side");

  plan.glyph_scale = 1;
  while (cell_capacity(cell_w, cell_h, plan.glyph_scale + 1) >= chars_per_cell)
    ++plan.glyph_scale;

  plan.cell_rects.reserve(n_features);
  for (int j = 0; j < n_features; ++j) {
    const int gr = j / plan.grid_cols;
    const int gc = j % plan.grid_cols;
    plan.cell_rects.push_back({gc * cell_w, gr * cell_h, cell_w, cell_h});
  }
  return plan;
}

std::string format_value(double v, int chars_per_cell) {
  if (!std::isfinite(v)) throw std::invalid_argument("invalid-input: non-finite feature value");
  if (chars_per_cell < 4)
    throw std::invalid_argument("invalid-config: chars_per_cell must be >= 4");

  const bool neg = std::signbit(v) && v != 0.0;
  const double mag = std::abs(v);
  const double hi = std::pow(10.0, chars_per_cell - 1);
  const double lo = std::pow(10.0, -(chars_per_cell - 2));

  if (mag < hi && (v == 0.0 || mag >= lo)) {
    // Truncated fixed point with as many decimals as the budget allows.
    const long long ip = static_cast<long long>(mag);
    const int int_digits = static_cast<int>(std::to_string(ip).size());
    const int decimals = std::max(0, chars_per_cell - (neg ? 1 : 0) - int_digits - 1);
    std::string s = neg ? "-" : "";
    s += std::to_string(ip);
    if (decimals > 0) {
      double frac = mag - static_cast<double>(ip);
      s += '.';
      for (int i = 0; i < decimals; ++i) {
        frac *= 10.0;
        int digit = std::min(9, static_cast<int>(frac));
        s += static_cast<char>('0' + digit);
        frac -= digit;
      }
    }
    return s;
  }

  // Scientific fallback: [-]D[.D...]eE, truncated mantissa.
  int exp10 = static_cast<int>(std::floor(std::log10(mag)));
  double mant = mag / std::pow(10.0, exp10);
  if (mant >= 10.0) {
    mant /= 10.0;
    ++exp10;
  } else if (mant < 1.0) {
    mant *= 10.0;
    --exp10;
  }
  std::string exp_str = std::to_string(exp10);
  int avail = chars_per_cell - (neg ? 1 : 0) - 1 - static_cast<int>(exp_str.size());
  if (avail < 1) {
    // Budget exhausted: saturate. Magnitudes below 1 are indistinguishable
    // from zero at this precision; oversized ones get the largest
    // representable form.
    if (mag < 1.0) return format_value(0.0, chars_per_cell);
    exp_str.assign(1, '9');
    avail = chars_per_cell - (neg ? 1 : 0) - 2;
    mant = 9.999999;
    exp10 = 9;
  }
  const int mant_digits = avail >= 3 ? avail - 1 : 1;
  long long digits =
      static_cast<long long>(mant * std::pow(10.0, mant_digits - 1));
  std::string mant_str = std::to_string(digits);
  if (static_cast<int>(mant_str.size()) > mant_digits) {  // 9.99.. rounded up past 10
    mant_str = mant_str.substr(0, mant_digits);
  }
  std::string s = neg ? "-" : "";
  s += mant_str.substr(0, 1);
  if (mant_digits > 1) s += "." + mant_str.substr(1);
  s += 'e';
  s += exp_str;
  return s;
}

void encode_instance(const std::vector<double>& x, const LayoutPlan& plan,
                     const GlyphFont& font, std::uint8_t* out) {
  if (x.size() != plan.cell_rects.size())
    throw std::invalid_argument("invalid-input: feature count does not match layout");
  const int side = plan.image_side;
  std::fill(out, out + static_cast<std::size_t>(side) * side, std::uint8_t{0});

  const int s = plan.glyph_scale;
  const int gw = kGlyphWidth * s;
  const int gh = kGlyphHeight * s;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const CellRect& cell = plan.cell_rects[j];
    const int per_row = cell.w / gw;
    const std::string text = format_value(x[j], plan.chars_per_cell);
    for (std::size_t ci = 0; ci < text.size(); ++ci) {
      const int tx = cell.x + static_cast<int>(ci % per_row) * gw;
      const int ty = cell.y + static_cast<int>(ci / per_row) * gh;
      const auto& glyph = font.glyph(text[ci]);
      for (int r = 0; r < kGlyphHeight; ++r) {
        for (int c = 0; c < kGlyphWidth; ++c) {
          if (!(glyph[r] >> (kGlyphWidth - 1 - c) & 1)) continue;
          for (int dy = 0; dy < s; ++dy) {
            std::uint8_t* row = out + static_cast<std::size_t>(ty + r * s + dy) * side;
            std::fill(row + tx + c * s, row + tx + (c + 1) * s, std::uint8_t{255});
          }
        }
      }
    }
  }
}

ImageChunk encode_chunk(const TabularChunk& chunk, const LayoutPlan& plan,
                        const GlyphFont& font) {
  if (chunk.size() == 0) throw std::invalid_argument("invalid-input: empty chunk");
  if (chunk.features.cols != plan.cell_rects.size())
    throw std::invalid_argument("invalid-input: feature count does not match layout");

  ImageChunk out;
  out.chunk_index = chunk.chunk_index;
  out.side = plan.image_side;
  out.count = chunk.size();
  out.labels = chunk.labels;
  out.pixels.resize(out.count * static_cast<std::size_t>(out.side) * out.side);
  for (std::size_t i = 0; i < out.count; ++i) {
    std::vector<double> x(chunk.features.row(i), chunk.features.row(i) + chunk.features.cols);
    encode_instance(x, plan, font, out.image(i));
  }
  return out;
}

void write_pgm(const std::string& path, const std::uint8_t* image, int side) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("io-error: cannot write '" + path + "'");
  out << "P5\n" << side << " " << side << "\n255\n";
  out.write(reinterpret_cast<const char*>(image), static_cast<std::streamsize>(side) * side);
}

}  // namespace sstml::encoder
