#pragma once

#include <nlohmann/json.hpp>

#include "patchpoison/diagnose.hpp"
#include "patchpoison/metrics.hpp"
#include "patchpoison/pattern.hpp"
#include "patchpoison/poison.hpp"

namespace patchpoison {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Non-finite values become "inf" / "-inf" / "nan" strings.
Json number_or_string(double v);
/// Inverse of number_or_string. Throws InvalidInput on anything else.
double number_from_json(const Json& j);

Json to_json(const PatchSpec& spec);
PatchSpec patch_spec_from_json(const Json& j);

Json to_json(const Region& r);
Region region_from_json(const Json& j);

Json to_json(const PoisonManifest& m);
PoisonManifest manifest_from_json(const Json& j);

Json to_json(const AggregateReport& r);
Json to_json(const DiagnosticReport& r);

/// Keypoints, descriptors and matches of a diagnosed pair.
Json features_debug_json(const PairFeatures& pf);

}  // namespace patchpoison
