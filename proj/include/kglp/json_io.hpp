#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "kglp/kgem.hpp"
#include "kglp/twig.hpp"

namespace kglp {

using json = nlohmann::json;

json kgem_config_to_json(const KgemConfig& c);
KgemConfig kgem_config_from_json(const json& j);

// nlohmann objects keep keys sorted, so the dump (and therefore the hash) is
// stable under field reordering in source files
std::uint64_t config_hash(const json& j);
std::string config_hash_hex(const json& j);

json grid_spec_to_json(const GridSpec& g);
GridSpec grid_spec_from_json(const json& j);

// JSON-lines record schema (one record per line)
inline constexpr int kRecordSchemaVersion = 1;

json record_to_json(const ExperimentRecord& rec);
ExperimentRecord record_from_json(const json& j);

void write_records(const std::string& path, std::span<const ExperimentRecord> records);
std::vector<ExperimentRecord> read_records(const std::string& path);

// reads every *.jsonl file in a directory (sorted by name)
std::vector<ExperimentRecord> read_records_dir(const std::string& dir);

} // namespace kglp
