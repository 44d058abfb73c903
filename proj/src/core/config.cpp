#include "core/config.hpp"

#include "core/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace opf::config {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const AppConfig& cfg) {
    ordered_json j;
    j["format_version"] = AppConfig::kFormatVersion;
    j["thresholds"] = {{"audio_max_distance_hz", cfg.thresholds.audio_max_distance_hz},
                       {"visual_max_distance", cfg.thresholds.visual_max_distance}};
    j["policy"] = {{"kind", decision::policy_kind_name(cfg.policy.kind)}, {"k", cfg.policy.k}};
    j["enrollment"] = {{"max_refs", cfg.max_refs}, {"refresh_on_accept", cfg.refresh_on_accept}};
    j["audio"] = {{"frame_size", cfg.audio.frame_size},
                  {"hop_size", cfg.audio.hop_size},
                  {"window", audio::window_name(cfg.audio.window)}};
    j["vision"] = {{"bins_per_channel", cfg.vision_bins_per_channel}};
    j["identity_distance"] = enroll::aggregation_name(cfg.identity_distance);
    j["gateway"] = {{"bind", cfg.gateway.bind},
                    {"max_connections", cfg.gateway.max_connections},
                    {"max_request_bytes", cfg.gateway.max_request_bytes}};
    return j;
}

// Missing sections fall back to defaults so a config file only needs to spell
// out what it overrides.
AppConfig from_json(const ordered_json& j) {
    AppConfig cfg = default_config();
    if (j.contains("format_version")) {
        uint32_t version = j.at("format_version").get<uint32_t>();
        if (version != AppConfig::kFormatVersion)
            raise(Errc::bad_version,
                  "config format_version " + std::to_string(version) + " is not supported");
    }
    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        if (t.contains("audio_max_distance_hz"))
            cfg.thresholds.audio_max_distance_hz = t.at("audio_max_distance_hz").get<double>();
        if (t.contains("visual_max_distance"))
            cfg.thresholds.visual_max_distance = t.at("visual_max_distance").get<double>();
        if (cfg.thresholds.audio_max_distance_hz < 0 || cfg.thresholds.visual_max_distance < 0)
            raise(Errc::invalid_argument, "thresholds must be non-negative");
    }
    if (j.contains("policy")) {
        const auto& p = j.at("policy");
        if (p.contains("kind"))
            cfg.policy.kind = decision::policy_kind_from_name(p.at("kind").get<std::string>());
        if (p.contains("k"))
            cfg.policy.k = p.at("k").get<uint32_t>();
        if (cfg.policy.kind == decision::PolicyKind::k_of_n &&
            (cfg.policy.k < 1 || cfg.policy.k > 3))
            raise(Errc::invalid_argument, "policy.k must be between 1 and 3");
    }
    if (j.contains("enrollment")) {
        const auto& e = j.at("enrollment");
        if (e.contains("max_refs"))
            cfg.max_refs = e.at("max_refs").get<uint32_t>();
        if (e.contains("refresh_on_accept"))
            cfg.refresh_on_accept = e.at("refresh_on_accept").get<bool>();
        if (cfg.max_refs == 0)
            raise(Errc::invalid_argument, "enrollment.max_refs must be positive");
    }
    if (j.contains("audio")) {
        const auto& a = j.at("audio");
        if (a.contains("frame_size"))
            cfg.audio.frame_size = a.at("frame_size").get<uint32_t>();
        if (a.contains("hop_size"))
            cfg.audio.hop_size = a.at("hop_size").get<uint32_t>();
        if (a.contains("window"))
            cfg.audio.window = audio::window_from_name(a.at("window").get<std::string>());
    }
    if (j.contains("vision")) {
        const auto& v = j.at("vision");
        if (v.contains("bins_per_channel"))
            cfg.vision_bins_per_channel = v.at("bins_per_channel").get<uint32_t>();
        if (cfg.vision_bins_per_channel < 2 || cfg.vision_bins_per_channel > 64)
            raise(Errc::invalid_argument, "vision.bins_per_channel must be between 2 and 64");
    }
    if (j.contains("identity_distance"))
        cfg.identity_distance =
            enroll::aggregation_from_name(j.at("identity_distance").get<std::string>());
    if (j.contains("gateway")) {
        const auto& g = j.at("gateway");
        if (g.contains("bind"))
            cfg.gateway.bind = g.at("bind").get<std::string>();
        if (g.contains("max_connections"))
            cfg.gateway.max_connections = g.at("max_connections").get<uint32_t>();
        if (g.contains("max_request_bytes"))
            cfg.gateway.max_request_bytes = g.at("max_request_bytes").get<uint64_t>();
        if (cfg.gateway.max_connections == 0)
            raise(Errc::invalid_argument, "gateway.max_connections must be positive");
        if (cfg.gateway.max_request_bytes == 0)
            raise(Errc::invalid_argument, "gateway.max_request_bytes must be positive");
    }
    return cfg;
}

} // namespace

AppConfig default_config() {
    return AppConfig{};
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        raise(Errc::io, "cannot open config " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::parse, "malformed config: " + std::string(e.what()));
    }
    try {
        return from_json(j);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::parse, "malformed config: " + std::string(e.what()));
    }
}

void save_config(const AppConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        raise(Errc::io, "cannot write config " + path.string());
    out << to_json(cfg).dump(2) << '\n';
    if (!out)
        raise(Errc::io, "short write to " + path.string());
}

std::string config_to_json(const AppConfig& cfg) {
    return to_json(cfg).dump(2);
}

AppConfig config_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::parse, "malformed config: " + std::string(e.what()));
    }
    try {
        return from_json(j);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::parse, "malformed config: " + std::string(e.what()));
    }
}

} // namespace opf::config
