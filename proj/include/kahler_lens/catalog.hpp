#pragma once

// Built-in immersions with declared, self-certified properties.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kahler_lens/immersion.hpp"

namespace kahler {

/// Unset fields are not asserted. A property declared false must fail at
/// some certification point (negative controls).
struct DeclaredProperties {
  std::optional<bool> minimal, totally_geodesic, lagrangian, complex, pluriminimal, constant_angles;

  nlohmann::json to_json() const;
};

struct ParameterSpec {
  std::string name;
  nlohmann::json default_value;
  std::string description;
};

struct CatalogEntry {
  std::string id;
  std::string description;
  std::string ambient;  // ambient id, or "product"
  std::vector<ParameterSpec> parameters;
  /// Parameters merged with defaults -> immersion and its declared properties.
  std::function<std::pair<ImmersionPtr, DeclaredProperties>(const nlohmann::json&)> factory;
};

const std::vector<CatalogEntry>& catalog_entries();
/// UnknownIdError for unknown ids.
const CatalogEntry& catalog_entry(const std::string& id);

struct CertificationOptions {
  double minimal_tol = 1e-6;
  double geodesic_tol = 1e-6;
  double lagrangian_tol = 1e-9;
  double complex_tol = 1e-9;
  double pluriminimal_tol = 1e-6;
  double constant_tol = 1e-8;
};

/// Deterministic points: the box center and center ± 0.3 half-width along
/// each axis.
std::vector<Vector> certification_points(const Immersion& f);

struct Certification {
  bool ok = true;
  std::vector<std::string> failed_properties;
  std::vector<std::string> failures;
  nlohmann::json residuals = nlohmann::json::object();
};
Certification certify(const Immersion& f, const DeclaredProperties& declared,
                      const CertificationOptions& options = {});

struct BuiltImmersion {
  ImmersionPtr immersion;
  DeclaredProperties declared;
  Certification certification;
};

/// Builds and certifies; CertificationError names the failed property.
/// Unknown parameter names raise Error, unknown ids UnknownIdError.
BuiltImmersion build_entry(const std::string& id, const nlohmann::json& params = nlohmann::json::object());
ImmersionPtr build(const std::string& id, const nlohmann::json& params = nlohmann::json::object());

/// Accepts a catalog id string, {"type": "catalog", "id", "params"},
/// {"type": "polynomial", ...} or {"type": "product", "factors": [a, b]}.
/// Any form may carry "declared_einstein_constant".
ImmersionPtr immersion_from_json(const nlohmann::json& j);
/// JSON text, a path to a JSON file, or a catalog id.
ImmersionPtr immersion_from_string(const std::string& s);

nlohmann::json describe_entry(const std::string& id);

}  // namespace kahler
