#pragma once

// JSON mappings for the configuration types. Readers accept partial objects
// (missing keys keep their defaults) and reject unknown keys.

#include <initializer_list>
#include <string>
#include <string_view>

#include "baas/datagen.hpp"
#include "baas/simcore.hpp"
#include "json.hpp"

namespace baas {

using Json = nlohmann::json;

/// Throws ValidationError naming the first key of `j` not in `allowed`.
void reject_unknown_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view context);

template <typename T>
void read_key(const Json& j, const char* key, T& out, std::string_view context);

}  // namespace baas

namespace baas::sim {
void to_json(Json& j, const ScalingConfig& c);
void from_json(const Json& j, ScalingConfig& c);
void to_json(Json& j, const SimParams& p);
void from_json(const Json& j, SimParams& p);
}  // namespace baas::sim

namespace baas::data {
void to_json(Json& j, const GridSpec& g);
void from_json(const Json& j, GridSpec& g);
void to_json(Json& j, const Provenance& p);
void from_json(const Json& j, Provenance& p);
}  // namespace baas::data
