#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "rtspn/model.hpp"

namespace rtspn {

/// Parses a system document. Unknown keys are rejected (ParseError);
/// the result is passed through validate_spec.
SystemSpec spec_from_json(const nlohmann::json& doc);
SystemSpec load_spec(const std::filesystem::path& path);

/// Canonical JSON form; key order is fixed so the dump is stable.
nlohmann::json spec_to_json(const SystemSpec& spec);

/// 64-bit FNV-1a, hex encoded. Used for config digests.
std::string digest_hex(std::string_view text);

}  // namespace rtspn
