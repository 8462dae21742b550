#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sstml/streams.hpp"

namespace sstml::streams {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, delim)) cells.push_back(cell);
  if (!line.empty() && line.back() == delim) cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(std::size_t row, const std::string& column,
                             const std::string& what) {
  throw std::runtime_error("parse-error: row " + std::to_string(row) + ", column " + column +
                           ": " + what);
}

double parse_double(const std::string& cell, std::size_t row, const std::string& column) {
  const std::string t = trim(cell);
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size())
    parse_fail(row, column, "'" + t + "' is not numeric");
  return v;
}

}  // namespace

std::vector<TabularChunk> load_csv_stream(const CsvStreamOptions& options) {
  if (options.chunk_size < 1)
    throw std::invalid_argument("invalid-config: chunk_size must be >= 1");
  if (options.label_column.empty())
    throw std::invalid_argument("invalid-config: label_column is required");
  if (options.positive_class.empty())
    throw std::invalid_argument("invalid-config: positive_class is required");

  std::ifstream in(options.path);
  if (!in) throw std::runtime_error("io-error: cannot open '" + options.path + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("parse-error: empty file");
  std::vector<std::string> header = split_line(line, options.delimiter);
  for (auto& h : header) h = trim(h);

  int label_idx = -1;
  {
    auto it = std::find(header.begin(), header.end(), options.label_column);
    if (it != header.end()) {
      label_idx = static_cast<int>(it - header.begin());
    } else {
      int idx = 0;
      auto [p, ec] = std::from_chars(options.label_column.data(),
                                     options.label_column.data() + options.label_column.size(),
                                     idx);
      if (ec == std::errc() && p == options.label_column.data() + options.label_column.size() &&
          idx >= 0 && idx < static_cast<int>(header.size())) {
        label_idx = idx;
      } else {
        throw std::invalid_argument("invalid-config: label column '" + options.label_column +
                                    "' not found");
      }
    }
  }
  const int n_cols = static_cast<int>(header.size());
  const int d = n_cols - 1;
  if (d < 1) throw std::runtime_error("parse-error: no feature columns");

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t row_no = 1;  // header is row 0
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      ++row_no;
      continue;
    }
    std::vector<std::string> cells = split_line(line, options.delimiter);
    if (static_cast<int>(cells.size()) != n_cols)
      parse_fail(row_no, "*", "expected " + std::to_string(n_cols) + " cells, got " +
                                  std::to_string(cells.size()));

    const std::string raw_label = trim(cells[label_idx]);
    if (!options.allowed_labels.empty() &&
        std::find(options.allowed_labels.begin(), options.allowed_labels.end(), raw_label) ==
            options.allowed_labels.end())
      parse_fail(row_no, header[label_idx], "label '" + raw_label + "' not in allowed set");
    labels.push_back(raw_label == options.positive_class ? 1 : 0);

    std::vector<double> x;
    x.reserve(d);
    for (int c = 0; c < n_cols; ++c) {
      if (c == label_idx) continue;
      x.push_back(parse_double(cells[c], row_no, header[c]));
    }
    rows.push_back(std::move(x));
    ++row_no;
  }

  const int n_chunks = static_cast<int>(rows.size()) / options.chunk_size;
  if (n_chunks == 0)
    throw std::runtime_error("invalid-config: fewer rows (" + std::to_string(rows.size()) +
                             ") than one chunk (" + std::to_string(options.chunk_size) + ")");

  std::vector<TabularChunk> chunks;
  chunks.reserve(n_chunks);
  for (int k = 0; k < n_chunks; ++k) {
    TabularChunk chunk;
    chunk.chunk_index = k;
    chunk.features = FeatureMatrix(options.chunk_size, d);
    chunk.labels.resize(options.chunk_size);
    for (int i = 0; i < options.chunk_size; ++i) {
      const std::size_t r = static_cast<std::size_t>(k) * options.chunk_size + i;
      std::copy(rows[r].begin(), rows[r].end(), chunk.features.row(i));
      chunk.labels[i] = labels[r];
    }
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

}  // namespace sstml::streams
