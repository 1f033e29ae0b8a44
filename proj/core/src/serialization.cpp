#include "tmap/serialization.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "tmap/error.hpp"

namespace tmap {

namespace {

using nlohmann::json;

json factor_json(const Factor& f) {
  const auto& b = f.family;
  json j{{"var", f.variable}, {"family", b.name()}};
  switch (b.kind()) {
    case BasisFamily::Kind::HermitePoly:
    case BasisFamily::Kind::HermiteFunction:
      j["degree"] = b.degree();
      break;
    case BasisFamily::Kind::EdgeControlledHermite:
      j["degree"] = b.degree();
      j["radius"] = b.radius();
      break;
    case BasisFamily::Kind::Rbf:
    case BasisFamily::Kind::IntegratedRbf:
    case BasisFamily::Kind::LeftEdge:
    case BasisFamily::Kind::RightEdge:
      j["center"] = b.center();
      j["scale"] = b.scale();
      break;
    default:
      break;
  }
  return j;
}

BasisFamily family_from_json(const json& j) {
  const auto kind = BasisFamily::kind_from_name(j.at("family").get<std::string>());
  switch (kind) {
    case BasisFamily::Kind::Constant: return BasisFamily::constant();
    case BasisFamily::Kind::Linear: return BasisFamily::linear();
    case BasisFamily::Kind::HermitePoly: return BasisFamily::hermite_poly(j.at("degree").get<int>());
    case BasisFamily::Kind::HermiteFunction:
      return BasisFamily::hermite_function(j.at("degree").get<int>());
    case BasisFamily::Kind::EdgeControlledHermite:
      return BasisFamily::edge_controlled(j.at("degree").get<int>(), j.at("radius").get<double>());
    case BasisFamily::Kind::Rbf:
      return BasisFamily::rbf(RbfKind::Rbf, j.at("center").get<double>(), j.at("scale").get<double>());
    case BasisFamily::Kind::IntegratedRbf:
      return BasisFamily::rbf(RbfKind::IntegratedRbf, j.at("center").get<double>(),
                              j.at("scale").get<double>());
    case BasisFamily::Kind::LeftEdge:
      return BasisFamily::rbf(RbfKind::LeftEdge, j.at("center").get<double>(),
                              j.at("scale").get<double>());
    case BasisFamily::Kind::RightEdge:
      return BasisFamily::rbf(RbfKind::RightEdge, j.at("center").get<double>(),
                              j.at("scale").get<double>());
  }
  throw MalformedInputError("unknown basis family");
}

json terms_json(const std::vector<TermSpec>& terms) {
  json arr = json::array();
  for (const auto& t : terms) {
    json factors = json::array();
    for (const auto& f : t.factors) factors.push_back(factor_json(f));
    arr.push_back({{"coefficient", t.coefficient}, {"factors", factors}});
  }
  return arr;
}

std::vector<TermSpec> terms_from_json(const json& arr) {
  std::vector<TermSpec> out;
  for (const auto& t : arr) {
    TermSpec term;
    term.coefficient = t.at("coefficient").get<double>();
    for (const auto& f : t.at("factors")) {
      term.factors.push_back({f.at("var").get<int>(), family_from_json(f)});
    }
    out.push_back(std::move(term));
  }
  return out;
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string map_to_json(const TriangularMap& map, const std::vector<int>& ordering_in,
                        const MapProvenance& provenance) {
  const int K = map.dim();
  std::vector<int> ordering = ordering_in;
  if (ordering.empty()) {
    ordering.resize(static_cast<std::size_t>(K));
    std::iota(ordering.begin(), ordering.end(), 0);
  }
  if (static_cast<int>(ordering.size()) != K) throw ContractViolation("ordering length differs from K");
  json doc;
  doc["schema_version"] = kMapSchemaVersion;
  doc["K"] = K;
  doc["ordering"] = ordering;
  doc["direction"] = map.direction() == MapDirection::TargetToReference ? "target_to_reference"
                                                                         : "reference_to_target";
  doc["standardizer"] = {{"mean", map.standardizer().mean()},
                         {"std", map.standardizer().stddev()}};
  json comps = json::array();
  for (const auto& c : map.components()) {
    comps.push_back({{"index", c.index()},
                     {"kind", component_kind_name(c.kind())},
                     {"active", c.active()},
                     {"rectifier", rectifier_name(c.rectifier())},
                     {"quadrature_order", c.quadrature_order()},
                     {"nonmonotone", terms_json(c.nonmonotone())},
                     {"monotone", terms_json(c.monotone())}});
  }
  doc["components"] = comps;
  doc["provenance"] = {{"command", provenance.command},
                       {"seed", provenance.seed},
                       {"data_hash", provenance.data_hash}};
  return doc.dump(2) + "\n";
}

MapDocument map_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedInputError(std::string("map file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema_version")) {
    throw MalformedInputError("map file has no schema_version");
  }
  const auto& v = doc["schema_version"];
  const std::string version = v.is_string() ? v.get<std::string>() : v.dump();
  if (version != kMapSchemaVersion) {
    throw SchemaVersionError("unsupported map schema version '" + version + "' (expected '" +
                             kMapSchemaVersion + "')");
  }
  try {
    const int K = doc.at("K").get<int>();
    auto ordering = doc.at("ordering").get<std::vector<int>>();
    std::vector<int> sorted = ordering;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(static_cast<std::size_t>(std::max(K, 0)));
    std::iota(expected.begin(), expected.end(), 0);
    if (sorted != expected) throw MalformedInputError("ordering is not a permutation of 0..K-1");
    const auto dir = doc.at("direction").get<std::string>();
    if (dir != "target_to_reference" && dir != "reference_to_target") {
      throw MalformedInputError("unknown map direction '" + dir + "'");
    }
    Standardizer st(doc.at("standardizer").at("mean").get<std::vector<double>>(),
                    doc.at("standardizer").at("std").get<std::vector<double>>());
    std::vector<MapComponent> comps;
    for (const auto& c : doc.at("components")) {
      comps.emplace_back(c.at("index").get<int>(), c.at("active").get<std::vector<int>>(),
                         component_kind_from_name(c.at("kind").get<std::string>()),
                         terms_from_json(c.at("nonmonotone")), terms_from_json(c.at("monotone")),
                         rectifier_from_name(c.at("rectifier").get<std::string>()),
                         c.at("quadrature_order").get<int>());
    }
    if (static_cast<int>(comps.size()) != K || st.dim() != K) {
      throw MalformedInputError("component or standardizer count differs from K");
    }
    MapProvenance prov;
    if (doc.contains("provenance")) {
      const auto& p = doc["provenance"];
      prov.command = p.value("command", "");
      prov.seed = p.value("seed", std::uint64_t{0});
      prov.data_hash = p.value("data_hash", "");
    }
    return {TriangularMap(std::move(comps), std::move(st),
                          dir == "target_to_reference" ? MapDirection::TargetToReference
                                                       : MapDirection::ReferenceToTarget),
            std::move(ordering), std::move(prov)};
  } catch (const MalformedInputError&) {
    throw;
  } catch (const json::exception& e) {
    throw MalformedInputError(std::string("map file is malformed: ") + e.what());
  } catch (const Error& e) {
    throw MalformedInputError(std::string("map file describes an invalid map: ") + e.what());
  }
}

}  // namespace tmap
