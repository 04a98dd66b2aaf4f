#pragma once

#include <json.hpp>

#include "twinflow/demand/profile.hpp"

namespace twinflow::demand {

nlohmann::json profile_to_json(const DriverProfile& profile);

/// Accepts either an aggressiveness label ("aggressiveness": "courteous_old")
/// or explicit numeric fields; unknown keys are rejected. Missing fields fall
/// back to `base`.
DriverProfile profile_from_json(const nlohmann::json& j, const DriverProfile& base = {});

}  // namespace twinflow::demand
