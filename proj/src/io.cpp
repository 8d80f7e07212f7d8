#include "msbm/io.hpp"

#include "msbm/error.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

namespace msbm {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'D', 'M', 'T', 'S'};
constexpr std::size_t kHeaderBytes = 4 + 1 + 3 * 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>((v >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[at + static_cast<std::size_t>(b)]) << (8 * b);
  return v;
}

std::size_t layer_bytes(std::uint64_t n) { return static_cast<std::size_t>((n * n + 7) / 8); }

}  // namespace

std::vector<std::uint8_t> encode_dmts(std::span<const Snapshot> snapshots) {
  if (snapshots.empty()) throw UsageError("DMTS needs at least one snapshot");
  const int n = snapshots.front().nodes();
  const int layers = snapshots.front().layers();
  const std::size_t per_layer = layer_bytes(static_cast<std::uint64_t>(n));
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.reserve(kHeaderBytes + snapshots.size() * static_cast<std::size_t>(layers) * per_layer);
  out.push_back(kDmtsVersion);
  put_u32(out, static_cast<std::uint32_t>(n));
  put_u32(out, static_cast<std::uint32_t>(layers));
  put_u32(out, static_cast<std::uint32_t>(snapshots.size()));
  for (const Snapshot& s : snapshots) {
    if (s.nodes() != n || s.layers() != layers) throw UsageError("DMTS snapshots must share n and L");
    for (int l = 0; l < layers; ++l) {
      const std::size_t base = out.size();
      out.resize(base + per_layer, 0);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i == j || !s.get(i, j, l)) continue;
          const std::size_t bit = static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
          out[base + bit / 8] |= static_cast<std::uint8_t>(0x80u >> (bit % 8));
        }
      }
    }
  }
  return out;
}

std::vector<Snapshot> decode_dmts(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw ParseError("DMTS: truncated header", bytes.size());
  for (std::size_t i = 0; i < kMagic.size(); ++i)
    if (bytes[i] != kMagic[i]) throw ParseError("DMTS: bad magic bytes", i);
  if (bytes[4] != kDmtsVersion) throw ParseError("DMTS: unsupported version " + std::to_string(bytes[4]), 4);
  const std::uint32_t n = get_u32(bytes, 5);
  const std::uint32_t layers = get_u32(bytes, 9);
  const std::uint32_t count = get_u32(bytes, 13);
  if (n < 1 || n > 65535) throw ParseError("DMTS: node count out of range", 5);
  if (layers < 1 || layers > 65535) throw ParseError("DMTS: layer count out of range", 9);
  if (count < 1) throw ParseError("DMTS: no snapshots", 13);

  const std::size_t per_layer = layer_bytes(n);
  const std::uint64_t expected = kHeaderBytes + static_cast<std::uint64_t>(count) * layers * per_layer;
  if (bytes.size() < expected) throw ParseError("DMTS: truncated payload", bytes.size());
  if (bytes.size() > expected) throw ParseError("DMTS: trailing bytes after payload", expected);

  const int nn = static_cast<int>(n);
  auto bit_at = [&](std::size_t base, int i, int j) {
    const std::size_t bit = static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j);
    return (bytes[base + bit / 8] & (0x80u >> (bit % 8))) != 0;
  };
  std::vector<Snapshot> out;
  out.reserve(count);
  std::size_t base = kHeaderBytes;
  for (std::uint32_t t = 0; t < count; ++t) {
    Snapshot s(nn, static_cast<int>(layers));
    for (int l = 0; l < static_cast<int>(layers); ++l, base += per_layer) {
      for (int i = 0; i < nn; ++i) {
        if (bit_at(base, i, i)) {
          throw ParseError("DMTS: non-zero diagonal in snapshot " + std::to_string(t),
                           base + (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(i)) / 8);
        }
        for (int j = i + 1; j < nn; ++j) {
          const bool up = bit_at(base, i, j);
          if (up != bit_at(base, j, i)) {
            throw ParseError("DMTS: asymmetric layer in snapshot " + std::to_string(t),
                             base + (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)) / 8);
          }
          if (up) s.set(i, j, l, true);
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_dmts(const std::filesystem::path& path, std::span<const Snapshot> snapshots) {
  const auto bytes = encode_dmts(snapshots);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<Snapshot> read_dmts(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError("failed reading '" + path.string() + "'");
  return decode_dmts(bytes);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::string cleaned = line;
  for (char& c : cleaned)
    if (c == ',') c = ' ';
  std::istringstream ss(cleaned);
  std::vector<std::string> fields;
  for (std::string f; ss >> f;) fields.push_back(f);
  return fields;
}

bool is_skippable(const std::vector<std::string>& fields) { return fields.empty() || fields.front().front() == '#'; }

long long parse_int(const std::string& s, std::uint64_t line, const char* what) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("line " + std::to_string(line) + ": " + what + " '" + s + "' is not an integer", line);
  }
  return v;
}

template <class NodeOf>
std::vector<Snapshot> ingest_rows(std::istream& in, int n, int layers, int t_max, NodeOf node_of) {
  if (n < 2 || layers < 1 || t_max < 0) throw UsageError("ingest needs n >= 2, L >= 1, T >= 0");
  std::vector<Snapshot> out(static_cast<std::size_t>(t_max) + 1, Snapshot(n, layers));
  std::string text;
  std::uint64_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto fields = split_fields(text);
    if (is_skippable(fields)) continue;
    if (fields.size() != 4) {
      throw ParseError("line " + std::to_string(line) + ": expected 4 fields 't i j l', got " +
                           std::to_string(fields.size()),
                       line);
    }
    const long long t = parse_int(fields[0], line, "time");
    const int i = node_of(fields[1], line);
    const int j = node_of(fields[2], line);
    const long long l = parse_int(fields[3], line, "layer");
    if (t < 0 || t > t_max) {
      throw ParseError("line " + std::to_string(line) + ": time " + fields[0] + " outside [0, " +
                           std::to_string(t_max) + "]",
                       line);
    }
    if (l < 1 || l > layers) {
      throw ParseError("line " + std::to_string(line) + ": layer " + fields[3] + " outside [1, " +
                           std::to_string(layers) + "]",
                       line);
    }
    if (i == j) throw ParseError("line " + std::to_string(line) + ": self-loop rows are not allowed", line);
    out[static_cast<std::size_t>(t)].set(i, j, static_cast<int>(l - 1), true);
  }
  if (in.bad()) throw IoError("failed reading edge list");
  return out;
}

}  // namespace

std::vector<Snapshot> ingest_edge_list(std::istream& in, int n, int layers, int t_max) {
  return ingest_rows(in, n, layers, t_max, [n](const std::string& s, std::uint64_t line) {
    const long long v = parse_int(s, line, "node");
    if (v < 1 || v > n) {
      throw ParseError("line " + std::to_string(line) + ": node " + s + " outside [1, " + std::to_string(n) + "]",
                       line);
    }
    return static_cast<int>(v - 1);
  });
}

std::vector<Snapshot> ingest_edge_list(std::istream& in, int n, int layers, int t_max, const NodeMap& node_map) {
  for (const auto& [label, idx] : node_map)
    if (idx < 0 || idx >= n) throw UsageError("node map index for '" + label + "' outside [1, n]");
  return ingest_rows(in, n, layers, t_max, [&node_map](const std::string& s, std::uint64_t line) {
    const auto it = node_map.find(s);
    if (it == node_map.end()) throw ParseError("line " + std::to_string(line) + ": unknown node '" + s + "'", line);
    return it->second;
  });
}

NodeMap read_node_map(std::istream& in) {
  NodeMap map;
  std::string text;
  std::uint64_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto fields = split_fields(text);
    if (is_skippable(fields)) continue;
    if (fields.size() != 2) throw ParseError("line " + std::to_string(line) + ": expected 'label index'", line);
    const long long idx = parse_int(fields[1], line, "index");
    if (idx < 1 || idx > std::numeric_limits<int>::max()) {
      throw ParseError("line " + std::to_string(line) + ": index must be >= 1", line);
    }
    if (!map.emplace(fields[0], static_cast<int>(idx - 1)).second) {
      throw ParseError("line " + std::to_string(line) + ": duplicate label '" + fields[0] + "'", line);
    }
  }
  return map;
}

}  // namespace msbm
