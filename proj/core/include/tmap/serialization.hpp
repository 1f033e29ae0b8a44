#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tmap/triangular_map.hpp"

namespace tmap {

inline constexpr const char* kMapSchemaVersion = "1";

struct MapProvenance {
  std::string command;
  std::uint64_t seed = 0;
  std::string data_hash;
};

/// A map together with the column ordering it was fitted under and where it
/// came from. ordering[j] is the input column placed at map position j.
struct MapDocument {
  TriangularMap map;
  std::vector<int> ordering;
  MapProvenance provenance;
};

/// JSON map file. Doubles are written in shortest round-trip form, so
/// loading reproduces every coefficient bit for bit. An empty ordering is
/// written as the identity.
std::string map_to_json(const TriangularMap& map, const std::vector<int>& ordering = {},
                        const MapProvenance& provenance = {});

/// Throws SchemaVersionError for an unknown schema version and
/// MalformedInputError for anything else that does not describe a valid map.
MapDocument map_from_json(const std::string& text);

/// 64-bit FNV-1a hash as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace tmap
