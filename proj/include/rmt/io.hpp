#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rmt/common.hpp"

namespace rmt::io {

/// Canonical serialization of a JSON value: nlohmann::json already stores
/// object keys sorted, so dump() with no indentation is stable across runs.
std::string canonical_dump(const nlohmann::json& j);

/// FNV-1a 64-bit digest of the canonical dump, as 16 lowercase hex chars.
/// Used to name the per-run output directory.
std::string config_hash(const nlohmann::json& j);

/// One emitted CSV table: a header row plus rows of 17-significant-digit
/// fields, written and read back without loss.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> fields);
  std::string serialize() const;
  static CsvTable parse(const std::string& text);
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Reproducibility record written next to every experiment's CSVs.
struct RunManifest {
  std::string config_digest;
  std::uint64_t master_seed = 0;
  std::string version;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
};

std::string artifact_version();

/// Current wall-clock time as an ISO-8601 UTC string.
std::string timestamp_utc();

}  // namespace rmt::io
