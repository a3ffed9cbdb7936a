#include "benchoracle/benchmark_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "benchoracle/csv.hpp"
#include "benchoracle/errors.hpp"

namespace benchoracle {

namespace {

void check_unique(const std::vector<std::string>& labels, const char* what) {
  std::set<std::string_view> seen;
  for (const auto& label : labels) {
    if (label.empty()) {
      throw ValidationError(std::string("empty ") + what + " label");
    }
    if (!seen.insert(label).second) {
      throw ValidationError(std::string("duplicate ") + what + " label '" +
                            label + "'");
    }
  }
}

std::optional<std::size_t> index_of(const std::vector<std::string>& labels,
                                    std::string_view label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

}  // namespace

BenchmarkMatrix::BenchmarkMatrix(std::size_t rows, std::size_t cols) {
  row_labels_.reserve(rows);
  col_labels_.reserve(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    row_labels_.push_back("t" + std::to_string(i));
  }
  for (std::size_t j = 0; j < cols; ++j) {
    col_labels_.push_back("d" + std::to_string(j));
  }
}

BenchmarkMatrix::BenchmarkMatrix(std::vector<std::string> row_labels,
                                 std::vector<std::string> col_labels)
    : row_labels_(std::move(row_labels)), col_labels_(std::move(col_labels)) {
  check_unique(row_labels_, "technique");
  check_unique(col_labels_, "device");
}

std::optional<std::size_t> BenchmarkMatrix::find_row(
    std::string_view label) const {
  return index_of(row_labels_, label);
}

std::optional<std::size_t> BenchmarkMatrix::find_col(
    std::string_view label) const {
  return index_of(col_labels_, label);
}

void BenchmarkMatrix::check_index(std::size_t i, std::size_t j) const {
  if (i >= rows() || j >= cols()) {
    throw ValidationError("index (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") outside " +
                          std::to_string(rows()) + "x" +
                          std::to_string(cols()) + " matrix");
  }
}

void BenchmarkMatrix::insert(std::size_t i, std::size_t j, double value) {
  check_index(i, j);
  if (!std::isfinite(value) || value < 0.0) {
    throw ValidationError("benchmark value must be finite and non-negative, got " +
                          csv::format_double(value));
  }
  entries_[Cell{i, j}] = value;
}

bool BenchmarkMatrix::erase(std::size_t i, std::size_t j) {
  check_index(i, j);
  return entries_.erase(Cell{i, j}) > 0;
}

std::optional<double> BenchmarkMatrix::lookup(std::size_t i,
                                              std::size_t j) const {
  check_index(i, j);
  auto it = entries_.find(Cell{i, j});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool BenchmarkMatrix::contains(std::size_t i, std::size_t j) const {
  return i < rows() && j < cols() && entries_.count(Cell{i, j}) > 0;
}

std::size_t BenchmarkMatrix::add_row(std::string label) {
  if (label.empty()) throw ValidationError("empty technique label");
  if (find_row(label)) {
    throw ValidationError("duplicate technique label '" + label + "'");
  }
  row_labels_.push_back(std::move(label));
  return row_labels_.size() - 1;
}

std::size_t BenchmarkMatrix::add_col(std::string label) {
  if (label.empty()) throw ValidationError("empty device label");
  if (find_col(label)) {
    throw ValidationError("duplicate device label '" + label + "'");
  }
  col_labels_.push_back(std::move(label));
  return col_labels_.size() - 1;
}

std::vector<Observation> BenchmarkMatrix::observations() const {
  std::vector<Observation> out;
  out.reserve(entries_.size());
  for (const auto& [cell, value] : entries_) {
    out.push_back(Observation{cell.row, cell.col, value});
  }
  return out;
}

std::vector<std::size_t> BenchmarkMatrix::observed_rows_in_col(
    std::size_t j) const {
  if (j >= cols()) {
    throw ValidationError("column " + std::to_string(j) + " outside matrix with " +
                          std::to_string(cols()) + " columns");
  }
  std::vector<std::size_t> out;
  for (const auto& [cell, value] : entries_) {
    if (cell.col == j) out.push_back(cell.row);
  }
  return out;
}

Normalizer::Normalizer(double min_observed, double max_observed)
    : min_(min_observed), max_(max_observed) {
  if (!(min_observed < max_observed)) {
    throw ValidationError("normalizer requires min < max");
  }
}

BenchmarkMatrix Normalizer::normalize(const BenchmarkMatrix& matrix) const {
  BenchmarkMatrix out(matrix.row_labels(), matrix.col_labels());
  for (const auto& [cell, value] : matrix.entries()) {
    // Values below min_ (from a scaler fit elsewhere) clamp to 0 so the
    // non-negativity invariant of the matrix holds.
    out.insert(cell.row, cell.col, std::max(0.0, normalize(value)));
  }
  return out;
}

Normalizer fit_normalizer(const BenchmarkMatrix& matrix) {
  if (matrix.empty()) {
    throw ValidationError("cannot fit a normalizer on an empty observed set");
  }
  auto [lo, hi] = std::minmax_element(
      matrix.entries().begin(), matrix.entries().end(),
      [](const auto& a, const auto& b) { return a.second < b.second; });
  const double min_value = lo->second;
  double max_value = hi->second;
  if (!(max_value > min_value)) max_value = min_value + 1.0;
  return Normalizer(min_value, max_value);
}

MaskResult apply_mask(const BenchmarkMatrix& matrix, std::size_t target_col,
                      double missing_fraction, std::uint64_t seed) {
  if (!(missing_fraction >= 0.0 && missing_fraction <= 1.0)) {
    throw ValidationError("missing fraction must lie in [0, 1]");
  }
  if (target_col >= matrix.cols()) {
    throw ValidationError("target column " + std::to_string(target_col) +
                          " outside matrix with " +
                          std::to_string(matrix.cols()) + " columns");
  }
  std::vector<std::size_t> rows = matrix.observed_rows_in_col(target_col);
  if (rows.empty()) {
    throw ValidationError("column '" + matrix.col_labels()[target_col] +
                          "' has no observed entries to mask");
  }
  const auto count = static_cast<std::size_t>(
      std::llround(missing_fraction * static_cast<double>(rows.size())));

  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(count);
  std::sort(rows.begin(), rows.end());

  MaskResult result{matrix, {}};
  result.held_out.reserve(count);
  for (std::size_t i : rows) {
    result.held_out.push_back(HeldOutEntry{i, *matrix.lookup(i, target_col)});
    result.masked.erase(i, target_col);
  }
  return result;
}

BenchmarkMatrix ingest_csv(std::istream& in) {
  std::string line;
  std::size_t line_number = 0;
  if (!csv::next_line(in, line, line_number)) {
    throw CsvError("CSV input is empty; expected a header row", 0, 0);
  }
  const std::size_t header_line = line_number;
  std::vector<std::string> header = csv::split_record(line);
  if (header.size() < 2) {
    throw CsvError("header needs a technique column and at least one device",
                   header_line, 0);
  }
  std::vector<std::string> devices;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string label(csv::trim(header[c]));
    if (label.empty()) {
      throw CsvError("empty device label", header_line, c + 1);
    }
    if (std::find(devices.begin(), devices.end(), label) != devices.end()) {
      throw CsvError("duplicate device label '" + label + "'", header_line,
                     c + 1);
    }
    devices.push_back(std::move(label));
  }

  struct PendingRow {
    std::size_t line;
    std::vector<std::string> fields;
  };
  std::vector<std::string> techniques;
  std::vector<PendingRow> pending;
  while (csv::next_line(in, line, line_number)) {
    std::vector<std::string> fields = csv::split_record(line);
    if (fields.size() != header.size()) {
      throw CsvError("ragged row: expected " + std::to_string(header.size()) +
                         " fields, found " + std::to_string(fields.size()),
                     line_number, 0);
    }
    std::string label(csv::trim(fields[0]));
    if (label.empty()) throw CsvError("empty technique label", line_number, 1);
    if (std::find(techniques.begin(), techniques.end(), label) !=
        techniques.end()) {
      throw CsvError("duplicate technique label '" + label + "'", line_number,
                     1);
    }
    techniques.push_back(std::move(label));
    pending.push_back(PendingRow{line_number, std::move(fields)});
  }

  BenchmarkMatrix matrix(std::move(techniques), std::move(devices));
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const auto& row = pending[i];
    for (std::size_t c = 1; c < row.fields.size(); ++c) {
      const std::string_view cell = csv::trim(row.fields[c]);
      if (cell.empty()) continue;
      auto value = csv::parse_double(cell);
      if (!value || !std::isfinite(*value)) {
        throw CsvError("unparseable numeric cell '" + std::string(cell) +
                           "' at row " + std::to_string(row.line) +
                           ", column " + std::to_string(c + 1),
                       row.line, c + 1);
      }
      if (*value < 0.0) {
        throw CsvError("negative benchmark value at row " +
                           std::to_string(row.line) + ", column " +
                           std::to_string(c + 1),
                       row.line, c + 1);
      }
      matrix.insert(i, c - 1, *value);
    }
  }
  return matrix;
}

BenchmarkMatrix ingest_csv_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ingest_csv(in);
}

BenchmarkMatrix ingest_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file '" + path + "'");
  return ingest_csv(in);
}

void export_csv(const BenchmarkMatrix& matrix, std::ostream& out) {
  out << "technique";
  for (const auto& label : matrix.col_labels()) {
    out << ',' << csv::escape_field(label);
  }
  out << '\n';
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    out << csv::escape_field(matrix.row_labels()[i]);
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      out << ',';
      if (auto v = matrix.lookup(i, j)) out << csv::format_double(*v);
    }
    out << '\n';
  }
}

std::string export_csv_text(const BenchmarkMatrix& matrix) {
  std::ostringstream out;
  export_csv(matrix, out);
  return out.str();
}

}  // namespace benchoracle
