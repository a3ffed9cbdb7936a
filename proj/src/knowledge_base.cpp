#include "benchoracle/knowledge_base.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "benchoracle/errors.hpp"

namespace benchoracle {

namespace {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

json payload_of(const StoreSnapshot& s) {
  json techniques = json::array();
  for (const auto& t : s.techniques()) {
    techniques.push_back(
        {{"id", t.id}, {"technique_type", t.technique_type}, {"registered_at", t.registered_at}});
  }
  json devices = json::array();
  for (const auto& d : s.devices()) {
    devices.push_back(
        {{"id", d.id}, {"domain", d.domain}, {"connectivity", d.connectivity}});
  }
  json entries = json::array();
  for (const auto& [cell, value] : s.matrix().entries()) {
    entries.push_back(json::array({cell.row, cell.col, value}));
  }
  json provenance = json::array();
  for (const auto& [cell, p] : s.provenance()) {
    provenance.push_back(json::array({cell.row, cell.col, to_string(p)}));
  }
  return json{{"version", kStoreFormatVersion},
              {"techniques", std::move(techniques)},
              {"devices", std::move(devices)},
              {"matrix",
               {{"row_labels", s.matrix().row_labels()},
                {"col_labels", s.matrix().col_labels()},
                {"entries", std::move(entries)}}},
              {"provenance", std::move(provenance)}};
}

std::string checksum_of(const json& payload) { return hex64(fnv1a(payload.dump())); }

}  // namespace

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::measured ? "measured" : "predicted";
}

Provenance provenance_from_string(std::string_view text) {
  if (text == "measured") return Provenance::measured;
  if (text == "predicted") return Provenance::predicted;
  throw ValidationError("unknown provenance '" + std::string(text) + "'");
}

StoreSnapshot StoreSnapshot::from_matrix(BenchmarkMatrix matrix,
                                         const std::string& technique_type,
                                         const std::string& domain) {
  StoreSnapshot s;
  const std::string now = current_timestamp();
  for (const auto& label : matrix.row_labels()) {
    s.techniques_.push_back(TechniqueRecord{label, technique_type, now});
  }
  for (const auto& label : matrix.col_labels()) {
    s.devices_.push_back(DeviceRecord{label, domain, true});
  }
  for (const auto& [cell, value] : matrix.entries()) {
    s.provenance_[cell] = Provenance::measured;
  }
  s.matrix_ = std::move(matrix);
  return s;
}

std::size_t StoreSnapshot::register_technique(TechniqueRecord record) {
  if (record.id.empty()) throw ValidationError("technique id must be nonempty");
  if (record.technique_type.empty()) {
    throw ValidationError("technique type must be nonempty");
  }
  if (find_technique(record.id)) {
    throw ValidationError("technique '" + record.id + "' is already registered");
  }
  const std::size_t index = matrix_.add_row(record.id);
  techniques_.push_back(std::move(record));
  return index;
}

std::size_t StoreSnapshot::register_device(DeviceRecord record) {
  if (record.id.empty()) throw ValidationError("device id must be nonempty");
  if (find_device(record.id)) {
    throw ValidationError("device '" + record.id + "' is already registered");
  }
  const std::size_t index = matrix_.add_col(record.id);
  devices_.push_back(std::move(record));
  return index;
}

const TechniqueRecord* StoreSnapshot::find_technique(std::string_view id) const {
  for (const auto& t : techniques_) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const DeviceRecord* StoreSnapshot::find_device(std::string_view id) const {
  for (const auto& d : devices_) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

std::optional<std::size_t> StoreSnapshot::technique_index(std::string_view id) const {
  return matrix_.find_row(id);
}

std::optional<std::size_t> StoreSnapshot::device_index(std::string_view id) const {
  return matrix_.find_col(id);
}

void StoreSnapshot::record(std::size_t i, std::size_t j, double value,
                           Provenance provenance) {
  auto it = provenance_.find(Cell{i, j});
  if (it != provenance_.end() && it->second == Provenance::measured &&
      provenance == Provenance::predicted) {
    throw ValidationError("refusing to overwrite measured entry (" +
                          matrix_.row_labels()[i] + ", " +
                          matrix_.col_labels()[j] + ") with a prediction");
  }
  matrix_.insert(i, j, value);
  provenance_[Cell{i, j}] = provenance;
}

std::optional<StoredEntry> StoreSnapshot::entry(std::size_t i, std::size_t j) const {
  auto value = matrix_.lookup(i, j);
  if (!value) return std::nullopt;
  return StoredEntry{*value, provenance_.at(Cell{i, j})};
}

BenchmarkMatrix StoreSnapshot::measured_matrix() const {
  BenchmarkMatrix out(matrix_.row_labels(), matrix_.col_labels());
  for (const auto& [cell, value] : matrix_.entries()) {
    if (provenance_.at(cell) == Provenance::measured) {
      out.insert(cell.row, cell.col, value);
    }
  }
  return out;
}

std::string serialize_store(const StoreSnapshot& snapshot) {
  json payload = payload_of(snapshot);
  const std::string checksum = checksum_of(payload);
  json doc = payload;
  doc["checksum"] = checksum;
  return doc.dump(1) + "\n";
}

StoreSnapshot parse_store(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("store file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("version") || !doc.contains("checksum")) {
    throw CorruptionError("store file lacks version/checksum");
  }
  try {
    const int version = doc.at("version").get<int>();
    if (version != kStoreFormatVersion) {
      throw IoError("store format version " + std::to_string(version) +
                    " is not supported (expected " +
                    std::to_string(kStoreFormatVersion) + ")");
    }
    const std::string stored = doc.at("checksum").get<std::string>();
    json payload = doc;
    payload.erase("checksum");
    if (checksum_of(payload) != stored) {
      throw CorruptionError("store checksum mismatch; file is corrupted");
    }

    const json& m = doc.at("matrix");
    BenchmarkMatrix matrix(m.at("row_labels").get<std::vector<std::string>>(),
                           m.at("col_labels").get<std::vector<std::string>>());
    for (const json& e : m.at("entries")) {
      matrix.insert(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(),
                    e.at(2).get<double>());
    }

    StoreSnapshot s;
    for (const json& t : doc.at("techniques")) {
      s.register_technique(TechniqueRecord{t.at("id").get<std::string>(),
                                           t.at("technique_type").get<std::string>(),
                                           t.at("registered_at").get<std::string>()});
    }
    for (const json& d : doc.at("devices")) {
      s.register_device(DeviceRecord{d.at("id").get<std::string>(),
                                     d.at("domain").get<std::string>(),
                                     d.at("connectivity").get<bool>()});
    }
    if (s.matrix().row_labels() != matrix.row_labels() ||
        s.matrix().col_labels() != matrix.col_labels()) {
      throw CorruptionError("matrix labels do not match the registered ids");
    }
    std::map<Cell, Provenance> provenance;
    for (const json& p : doc.at("provenance")) {
      provenance[Cell{p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>()}] =
          provenance_from_string(p.at(2).get<std::string>());
    }
    for (const auto& [cell, value] : matrix.entries()) {
      auto it = provenance.find(cell);
      if (it == provenance.end()) {
        throw CorruptionError("observed entry without provenance");
      }
      s.record(cell.row, cell.col, value, it->second);
    }
    if (provenance.size() != matrix.observed_count()) {
      throw CorruptionError("provenance lists cells that are not observed");
    }
    return s;
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("store file is malformed: ") + e.what());
  } catch (const ValidationError& e) {
    throw CorruptionError(std::string("store file is inconsistent: ") + e.what());
  }
}

void save_store(const StoreSnapshot& snapshot, const std::string& path) {
  namespace fs = std::filesystem;
  const std::string text = serialize_store(snapshot);
  const fs::path target(path);
  fs::path temp = target;
  temp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write store file '" + temp.string() + "'");
    out << text;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(temp, ec);
      throw IoError("failed writing store file '" + temp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw IoError("cannot replace store file '" + path + "': " + ec.message());
  }
}

StoreSnapshot load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open store file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_store(buffer.str());
}

std::string current_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

}  // namespace benchoracle
