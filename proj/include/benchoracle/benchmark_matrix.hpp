#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace benchoracle {

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// One observed benchmark, flattened for the training loops.
struct Observation {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

// Sparse technique x device matrix of benchmark measurements. Rows are
// techniques, columns are devices. A missing benchmark is an absent key,
// never a stored zero.
class BenchmarkMatrix {
 public:
  BenchmarkMatrix() = default;
  // Labels default to "t<i>" / "d<j>".
  BenchmarkMatrix(std::size_t rows, std::size_t cols);
  BenchmarkMatrix(std::vector<std::string> row_labels,
                  std::vector<std::string> col_labels);

  std::size_t rows() const noexcept { return row_labels_.size(); }
  std::size_t cols() const noexcept { return col_labels_.size(); }
  std::size_t observed_count() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const std::vector<std::string>& row_labels() const noexcept {
    return row_labels_;
  }
  const std::vector<std::string>& col_labels() const noexcept {
    return col_labels_;
  }
  std::optional<std::size_t> find_row(std::string_view label) const;
  std::optional<std::size_t> find_col(std::string_view label) const;

  // Throws ValidationError on out-of-range index or a negative/non-finite
  // value. Overwrites an existing entry.
  void insert(std::size_t i, std::size_t j, double value);
  bool erase(std::size_t i, std::size_t j);
  std::optional<double> lookup(std::size_t i, std::size_t j) const;
  bool contains(std::size_t i, std::size_t j) const;

  // Appends an empty row/column; returns its index. Duplicate labels throw.
  std::size_t add_row(std::string label);
  std::size_t add_col(std::string label);

  const std::map<Cell, double>& entries() const noexcept { return entries_; }
  std::vector<Observation> observations() const;
  std::vector<std::size_t> observed_rows_in_col(std::size_t j) const;

  friend bool operator==(const BenchmarkMatrix&,
                         const BenchmarkMatrix&) = default;

 private:
  void check_index(std::size_t i, std::size_t j) const;

  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
  std::map<Cell, double> entries_;
};

// Global min-max scaler over every observed entry.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(double min_observed, double max_observed);

  double min_observed() const noexcept { return min_; }
  double max_observed() const noexcept { return max_; }
  double range() const noexcept { return max_ - min_; }

  double normalize(double value) const noexcept {
    return (value - min_) / (max_ - min_);
  }
  double denormalize(double value) const noexcept {
    return min_ + value * (max_ - min_);
  }

  BenchmarkMatrix normalize(const BenchmarkMatrix& matrix) const;

 private:
  double min_ = 0.0;
  double max_ = 1.0;
};

// Extrema over observed entries; an all-equal matrix gets max = min + 1.
Normalizer fit_normalizer(const BenchmarkMatrix& matrix);

struct HeldOutEntry {
  std::size_t row = 0;
  double value = 0.0;

  friend bool operator==(const HeldOutEntry&, const HeldOutEntry&) = default;
};

struct MaskResult {
  BenchmarkMatrix masked;
  std::vector<HeldOutEntry> held_out;  // sorted by row
};

// Removes round(fraction * observed-in-column) entries of target_col, chosen
// uniformly at random from the seed.
MaskResult apply_mask(const BenchmarkMatrix& matrix, std::size_t target_col,
                      double missing_fraction, std::uint64_t seed);

BenchmarkMatrix ingest_csv(std::istream& in);
BenchmarkMatrix ingest_csv_text(std::string_view text);
BenchmarkMatrix ingest_csv_file(const std::string& path);

void export_csv(const BenchmarkMatrix& matrix, std::ostream& out);
std::string export_csv_text(const BenchmarkMatrix& matrix);

}  // namespace benchoracle
