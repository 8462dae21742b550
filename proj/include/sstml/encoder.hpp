#ifndef SSTML_ENCODER_HPP
#define SSTML_ENCODER_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sstml/types.hpp"

namespace sstml::encoder {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;

/// Fixed 5x7 bitmap font over the characters format_value can emit:
/// digits, '.', '-', 'e'. Each row is a bitmask with bit 4 leftmost.
struct GlyphFont {
  std::array<std::array<std::uint8_t, kGlyphHeight>, 13> rows;

  static const GlyphFont& standard();
  const std::array<std::uint8_t, kGlyphHeight>& glyph(char c) const;
};

struct CellRect {
  int x = 0, y = 0, w = 0, h = 0;
  bool operator==(const CellRect&) const = default;
};

/// Uniform grid placement of feature cells plus the glyph scale shared by
/// every cell. Depends only on (n_features, image_side), never on data.
struct LayoutPlan {
  int image_side = 0;
  int grid_rows = 0;
  int grid_cols = 0;
  int chars_per_cell = 5;
  int glyph_scale = 1;
  std::vector<CellRect> cell_rects;  // one per feature, row-major
};

/// Throws std::invalid_argument ("layout-error: ...") when a cell cannot
/// hold chars_per_cell glyphs even at scale 1.
LayoutPlan plan_layout(int n_features, int image_side, int chars_per_cell = 5);

/// Renders v into at most chars_per_cell characters: truncated fixed point
/// where it fits, scientific notation for magnitudes outside
/// [10^-(c-2), 10^(c-1)). Throws on non-finite input.
std::string format_value(double v, int chars_per_cell);

/// White-on-black rasterization of one instance; out must hold side*side
/// bytes and is fully overwritten.
void encode_instance(const std::vector<double>& x, const LayoutPlan& plan,
                     const GlyphFont& font, std::uint8_t* out);

ImageChunk encode_chunk(const TabularChunk& chunk, const LayoutPlan& plan,
                        const GlyphFont& font);

/// Debug export (binary PGM, P5).
void write_pgm(const std::string& path, const std::uint8_t* image, int side);

}  // namespace sstml::encoder

#endif
