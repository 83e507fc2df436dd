#include "nct/manifest.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>

namespace nct {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string iso8601_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["tool_version"] = tool_version;
    j["seed"] = seed;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : config) cfg[k] = v;
    j["config"] = cfg;
    nlohmann::json digests = nlohmann::json::object();
    for (const auto& [path, digest] : input_digests) digests[path] = digest;
    j["input_digests"] = digests;
    nlohmann::json skips = nlohmann::json::array();
    for (const auto& [path, reason] : skipped)
        skips.push_back({{"path", path}, {"reason", reason}});
    j["skipped"] = skips;
    nlohmann::json st = nlohmann::json::object();
    for (const auto& [k, v] : stats) st[k] = v;
    j["stats"] = st;
    j["timestamp"] = timestamp.empty() ? iso8601_utc_now() : timestamp;
    return j.dump(2) + "\n";
}

} // namespace nct
