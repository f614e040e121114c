#pragma once

#include "mmffc/data.hpp"
#include "mmffc/federation.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace mmffc {

using json = nlohmann::json;

/// {"clients": {"0": [...], ...}, "seed": s, "mode": "iid"|"noniid"}
json partition_to_json(const Partition& p);
Partition partition_from_json(const json& j);

/// [{"expr": ..., "fitness": ..., "client": ..., "round": ...}, ...]
json features_to_json(const std::vector<ConstructedFeature>& features);
std::vector<ConstructedFeature> features_from_json(const json& j);

/// One JSON-lines record, keys in schema order, no trailing newline.
std::string round_to_jsonl(const RoundRecord& r);

json report_to_json(const ChampionReport& r);
json update_to_json(const GlobalUpdate& u);

json config_to_json(const RunConfig& c);
/// Reads the keys it knows and erases them from `j`.
RunConfig config_from_json(json& j);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mmffc
