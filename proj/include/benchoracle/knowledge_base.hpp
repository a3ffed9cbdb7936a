#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "benchoracle/benchmark_matrix.hpp"

namespace benchoracle {

enum class Provenance { measured, predicted };

std::string_view to_string(Provenance provenance);
Provenance provenance_from_string(std::string_view text);

struct TechniqueRecord {
  std::string id;
  std::string technique_type;
  std::string registered_at;  // ISO-8601 UTC

  friend bool operator==(const TechniqueRecord&, const TechniqueRecord&) = default;
};

struct DeviceRecord {
  std::string id;
  std::string domain;
  bool connectivity = true;

  friend bool operator==(const DeviceRecord&, const DeviceRecord&) = default;
};

struct StoredEntry {
  double value = 0.0;
  Provenance provenance = Provenance::measured;
};

// The ML techniques store: technique and device registries plus the benchmark
// matrix whose row/column labels are exactly the registered ids.
class StoreSnapshot {
 public:
  StoreSnapshot() = default;

  // Every observed entry of the matrix becomes a measured entry.
  static StoreSnapshot from_matrix(BenchmarkMatrix matrix,
                                   const std::string& technique_type = "unspecified",
                                   const std::string& domain = "default");

  const std::vector<TechniqueRecord>& techniques() const noexcept {
    return techniques_;
  }
  const std::vector<DeviceRecord>& devices() const noexcept { return devices_; }
  const BenchmarkMatrix& matrix() const noexcept { return matrix_; }
  const std::map<Cell, Provenance>& provenance() const noexcept {
    return provenance_;
  }

  // Duplicate ids throw ValidationError. The matrix gains an empty row/column.
  std::size_t register_technique(TechniqueRecord record);
  std::size_t register_device(DeviceRecord record);

  const TechniqueRecord* find_technique(std::string_view id) const;
  const DeviceRecord* find_device(std::string_view id) const;
  std::optional<std::size_t> technique_index(std::string_view id) const;
  std::optional<std::size_t> device_index(std::string_view id) const;

  // A measured entry is never overwritten by a prediction; that attempt
  // throws ValidationError.
  void record(std::size_t i, std::size_t j, double value, Provenance provenance);
  std::optional<StoredEntry> entry(std::size_t i, std::size_t j) const;

  // Measured entries only.
  BenchmarkMatrix measured_matrix() const;

  friend bool operator==(const StoreSnapshot&, const StoreSnapshot&) = default;

 private:
  std::vector<TechniqueRecord> techniques_;
  std::vector<DeviceRecord> devices_;
  BenchmarkMatrix matrix_;
  std::map<Cell, Provenance> provenance_;
};

inline constexpr int kStoreFormatVersion = 1;

std::string serialize_store(const StoreSnapshot& snapshot);
// Throws CorruptionError on malformed JSON, checksum mismatch or a
// structurally invalid store; IoError on version mismatch.
StoreSnapshot parse_store(std::string_view text);

// Writes to a temporary sibling then renames over path.
void save_store(const StoreSnapshot& snapshot, const std::string& path);
StoreSnapshot load_store(const std::string& path);

std::string current_timestamp();

}  // namespace benchoracle
