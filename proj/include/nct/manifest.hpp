#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nct {

inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

/// Reproducibility record written next to each command's outputs.
struct RunManifest {
    std::string command;
    std::string tool_version = kToolVersion;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> config;        // key, value
    std::vector<std::pair<std::string, std::string>> input_digests; // path, fnv1a64
    std::vector<std::pair<std::string, std::string>> skipped;       // path, reason
    std::vector<std::pair<std::string, std::string>> stats;         // key, value
    std::string timestamp; // ISO-8601 UTC, set at write time

    std::string to_json() const;
};

std::string iso8601_utc_now();

} // namespace nct
