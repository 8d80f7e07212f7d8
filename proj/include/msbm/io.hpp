#pragma once

#include "msbm/model.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace msbm {

/// DMTS container: "DMTS", version 0x01, u32 LE n, L, T, then T snapshots of
/// L layers, each a row-major n x n bit matrix packed MSB-first in
/// ceil(n^2 / 8) bytes. The first snapshot is the initial state A^0.
inline constexpr std::uint8_t kDmtsVersion = 0x01;

std::vector<std::uint8_t> encode_dmts(std::span<const Snapshot> snapshots);
std::vector<Snapshot> decode_dmts(std::span<const std::uint8_t> bytes);

void write_dmts(const std::filesystem::path& path, std::span<const Snapshot> snapshots);
std::vector<Snapshot> read_dmts(const std::filesystem::path& path);

/// Builds A^0..A^T from whitespace/comma separated rows "t i j l" (1-based
/// nodes and layers, t in [0, T]). Duplicate rows are idempotent; self-loops,
/// out-of-range values and malformed rows raise ParseError with the line.
/// Lines starting with '#' are ignored.
std::vector<Snapshot> ingest_edge_list(std::istream& in, int n, int layers, int t_max);

/// Node labels to 0-based indices; rows then name nodes by label.
using NodeMap = std::map<std::string, int>;
std::vector<Snapshot> ingest_edge_list(std::istream& in, int n, int layers, int t_max,
                                       const NodeMap& node_map);

/// Reads "label index" lines (1-based index).
NodeMap read_node_map(std::istream& in);

}  // namespace msbm
