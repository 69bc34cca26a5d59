#pragma once

// JSON persistence for EusBuild. Multiprecision values are stored as exact
// decimal strings together with the build precision, so a loaded build
// reproduces every verdict of the original.

#include "kicked/construct_eus.hpp"

#include <json.hpp>

#include <string>

namespace kicked {

nlohmann::json eus_to_json(const EusBuild& build);
/// Reads at the stored precision; the returned values keep it.
EusBuild eus_from_json(const nlohmann::json& j);

void save_eus(const EusBuild& build, const std::string& path);
EusBuild load_eus(const std::string& path);

nlohmann::json membership_to_json(const MembershipReport& r);

}  // namespace kicked
