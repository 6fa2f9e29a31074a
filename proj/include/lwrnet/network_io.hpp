#pragma once

// JSON serialization of metric networks. Top-level keys: "vertices" (ids),
// "edges" (id/tail/head/length records) and "distribution" (per-vertex
// row-major matrix with its declared incoming/outgoing edge order). Unknown
// keys are rejected everywhere.

#include <filesystem>
#include <string>

#include "lwrnet/network.hpp"

namespace lwrnet {

std::string network_to_json(const MetricNetwork& net);
MetricNetwork network_from_json(const std::string& text);

void save_network(const MetricNetwork& net, const std::filesystem::path& path);
MetricNetwork load_network(const std::filesystem::path& path);

}  // namespace lwrnet
