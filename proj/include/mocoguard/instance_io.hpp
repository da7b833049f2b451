#pragma once

/// JSONL (de)serialization of instances. One JSON object per line with
/// fields {id, kind, n, features, demands?, capacity?, provenance}. Doubles
/// are written in shortest round-trip form, so read(write(x)) == x bitwise.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mocoguard/core.hpp"

namespace mocoguard {

nlohmann::json instance_to_json(const Instance& inst);

/// Parses and validates; throws SchemaError on malformed records.
Instance instance_from_json(const nlohmann::json& j);

std::string instance_to_line(const Instance& inst);

void write_instances(const std::filesystem::path& path, const std::vector<Instance>& instances);
std::vector<Instance> read_instances(const std::filesystem::path& path);

/// Reads the non-empty lines of a JSONL file as parsed JSON objects.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);

}  // namespace mocoguard
