#pragma once

// On-disk audit inputs built from simulated presets.

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

namespace fixture {

using Json = nlohmann::ordered_json;

/// Fresh empty directory under the test scratch root.
std::filesystem::path scratch(const std::string& name);

/// Writes data.csv (observed columns of `preset` sampled with `seed`), the
/// preset's graph as <preset>.dag and config.json with the given roles and
/// criteria. Returns the config path.
std::filesystem::path write_audit(const std::filesystem::path& dir, const std::string& preset, std::size_t n,
                                  std::uint64_t seed, const Json& roles, const Json& criteria, std::size_t reps);

std::string read(const std::filesystem::path& path);

}  // namespace fixture
