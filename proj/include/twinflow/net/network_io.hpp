#pragma once

#include <filesystem>
#include <string>

#include "twinflow/net/network.hpp"

namespace twinflow::net {

/// Canonical network document (UTF-8 JSON, keys: intersections, roads,
/// connections, signals; meters / seconds / m/s). Field names are pinned by
/// the golden files under tests/data.
std::string save_network(const RoadNetwork& net);
void save_network_file(const RoadNetwork& net, const std::filesystem::path& path);

/// Parses and validates; throws NetworkError with field context on schema
/// problems and with the validation summary on referential-integrity
/// violations.
RoadNetwork load_network(const std::string& document);
RoadNetwork load_network_file(const std::filesystem::path& path);

}  // namespace twinflow::net
