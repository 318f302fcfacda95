#pragma once

#include <string>

#include "json.hpp"

namespace nilcube::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitCap = 3 };

std::string sha256_hex(const std::string& data);
// Two-space indented JSON with sorted keys and a trailing newline.
std::string render(const nlohmann::json& report);

}  // namespace nilcube::cli
