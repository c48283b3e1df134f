#pragma once

#include <string>

#include <json.hpp>

#include "bitree/config.hpp"
#include "bitree/constants.hpp"
#include "bitree/constructive.hpp"
#include "bitree/types.hpp"

namespace bitree {

// Measure schema: { "kind": "tree"|"bitree", "depth_x": int,
//                   "depth_y": int (bitree only),
//                   "masses": [nonnegative, level-order boundary index] }
nlohmann::json measure_to_json(const BoundaryMeasure& mu);
BoundaryMeasure measure_from_json(const nlohmann::json& j, const GeometryLimits& limits = {});

// Set schema mirrors the measure schema with a sorted "indices" array.
nlohmann::json set_to_json(const BoundarySet& s);
BoundarySet set_from_json(const nlohmann::json& j, const GeometryLimits& limits = {});

nlohmann::json energy_to_json(const EnergyReport& rep);
nlohmann::json constant_to_json(const ConstantReport& rep);
nlohmann::json ordering_to_json(const OrderingReport& rep);
nlohmann::json majorant_to_json(const MajorantResult& rep);
nlohmann::json peeling_to_json(const PeelingResult& rep);
nlohmann::json config_to_json(const Config& cfg);

// Node functions as binary little-endian doubles behind a 16-byte header
// (8-byte magic, u32 version, u32 node count).
void write_node_function_binary(const std::string& path, const Eigen::VectorXd& values);
Eigen::VectorXd read_node_function_binary(const std::string& path);

// Atomic file write: temp file in the same directory, then rename.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace bitree
