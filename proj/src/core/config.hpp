#pragma once

#include "core/audio.hpp"
#include "core/decision.hpp"
#include "core/enrollment.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace opf::config {

struct GatewayConfig {
    std::string bind = "127.0.0.1:4710";
    uint32_t max_connections = 16;
    uint64_t max_request_bytes = 16 * 1024 * 1024;
};

struct AppConfig {
    static constexpr uint32_t kFormatVersion = 1;

    decision::Thresholds thresholds;
    decision::PolicySpec policy;
    uint32_t max_refs = enroll::EnrollmentStore::kDefaultMaxRefs;
    bool refresh_on_accept = true;
    audio::SignatureParams audio;
    uint32_t vision_bins_per_channel = 8;
    enroll::Aggregation identity_distance = enroll::Aggregation::mean;
    GatewayConfig gateway;
};

AppConfig default_config();
AppConfig load_config(const std::filesystem::path& path);
void save_config(const AppConfig& cfg, const std::filesystem::path& path);
std::string config_to_json(const AppConfig& cfg);
AppConfig config_from_json(const std::string& text);

} // namespace opf::config
