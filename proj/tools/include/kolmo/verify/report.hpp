#pragma once

#include "json.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kolmo::verify {

inline constexpr int kReportSchemaVersion = 1;

enum class Status { pass, fail, recorded };

std::string to_string(Status s);

/// One verified statement. `anchor` is a key of anchor_map().
struct CheckRecord {
  std::string name;
  std::string anchor;
  std::vector<std::pair<std::string, double>> measured;
  std::optional<double> predicted;
  std::optional<double> tolerance;
  Status status = Status::recorded;
  std::string note;

  CheckRecord& value(const std::string& key, double v) {
    measured.emplace_back(key, v);
    return *this;
  }
};

inline CheckRecord check(std::string name, std::string anchor) {
  CheckRecord r;
  r.name = std::move(name);
  r.anchor = std::move(anchor);
  return r;
}

/// Anchor keys and the statement each one refers to.
const std::map<std::string, std::string>& anchor_map();

struct VerificationReport {
  std::string scenario_name;
  std::map<std::string, std::string> scenario;
  std::vector<CheckRecord> records;
  double wall_time = 0.0;
  std::string timestamp;

  void add(std::vector<CheckRecord> more);
  /// Records sorted by name.
  void sort();
  bool any_failed() const;
  std::size_t count(Status s) const;

  /// Deterministic part: schema version, scenario echo and records.
  nlohmann::json payload() const;
  /// payload() plus the run stamp (time, wall clock, host details).
  nlohmann::json full() const;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// name,status,anchor,predicted,tolerance,key=value;... one row per record.
void write_records_csv(const std::filesystem::path& path, const std::vector<CheckRecord>& records);

}  // namespace kolmo::verify
