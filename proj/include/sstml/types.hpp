#ifndef SSTML_TYPES_HPP
#define SSTML_TYPES_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sstml {

/// Dense row-major matrix of feature values.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // rows * cols, row-major

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  const double* row(std::size_t r) const { return values.data() + r * cols; }
  double* row(std::size_t r) { return values.data() + r * cols; }
};

/// One window of the stream: N instances with binary labels.
/// Class 1 is the positive/minority class throughout.
struct TabularChunk {
  int chunk_index = 0;
  FeatureMatrix features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

/// STML-encoded counterpart of a TabularChunk: N square binary images.
/// Pixels take values 0 (background) or 255 (glyph).
struct ImageChunk {
  int chunk_index = 0;
  int side = 0;
  std::size_t count = 0;
  std::vector<std::uint8_t> pixels;  // count * side * side, row-major per image
  std::vector<int> labels;

  const std::uint8_t* image(std::size_t i) const {
    return pixels.data() + i * static_cast<std::size_t>(side) * side;
  }
  std::uint8_t* image(std::size_t i) {
    return pixels.data() + i * static_cast<std::size_t>(side) * side;
  }
};

}  // namespace sstml

#endif
