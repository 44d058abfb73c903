#include "gateway/gateway.hpp"

#include "core/base64.hpp"
#include "core/errors.hpp"
#include "core/wav.hpp"

#include <nlohmann/json.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <iostream>

namespace opf::gateway {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string error_line(const std::string& message, const std::string& request_id = "") {
    ordered_json j;
    j["error"] = message;
    if (!request_id.empty())
        j["request_id"] = request_id;
    return j.dump();
}

ordered_json outcome_to_json(const decision::FactorOutcome& o) {
    ordered_json j;
    j["factor"] = decision::factor_name(o.factor);
    j["status"] = decision::factor_status_name(o.status);
    if (o.score)
        j["score"] = *o.score;
    if (o.threshold)
        j["threshold"] = *o.threshold;
    if (!o.detail.empty())
        j["detail"] = o.detail;
    return j;
}

ordered_json decision_fields(const decision::AuthDecision& d) {
    ordered_json j;
    j["verdict"] = d.verdict == decision::Verdict::accept ? "accept" : "deny";
    j["identity_id"] = d.identity_id;
    ordered_json outcomes = ordered_json::array();
    for (const auto& o : d.outcomes)
        outcomes.push_back(outcome_to_json(o));
    j["outcomes"] = std::move(outcomes);
    j["policy"] = decision::policy_kind_name(d.policy.kind);
    j["reason"] = d.reason;
    return j;
}

// Exactly one of path/payload may be set; returns the raw capture bytes or
// records the failure.
std::optional<std::vector<uint8_t>> fetch_capture(const std::string& path,
                                                  const std::string& payload, std::string& error) {
    if (!payload.empty()) {
        try {
            return base64::decode(payload);
        } catch (const Error& e) {
            error = e.what();
            return std::nullopt;
        }
    }
    if (!path.empty()) {
        std::FILE* f = std::fopen(path.c_str(), "rb");
        if (!f) {
            error = "cannot open " + path;
            return std::nullopt;
        }
        std::vector<uint8_t> bytes;
        uint8_t buf[65536];
        size_t n;
        while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0)
            bytes.insert(bytes.end(), buf, buf + n);
        bool bad = std::ferror(f);
        std::fclose(f);
        if (bad) {
            error = "read error on " + path;
            return std::nullopt;
        }
        return bytes;
    }
    return std::nullopt;
}

void attach_audio(decision::ProbeInput& probe, const std::vector<uint8_t>& bytes,
                  const config::AppConfig& cfg) {
    try {
        probe.audio_probe = audio::audio_signature(wav::decode(bytes), cfg.audio);
    } catch (const Error& e) {
        probe.audio_error = e.what();
    }
}

void attach_image(decision::ProbeInput& probe, const std::vector<uint8_t>& bytes,
                  const std::optional<std::vector<uint8_t>>& mask_bytes,
                  const config::AppConfig& cfg) {
    try {
        std::optional<std::span<const uint8_t>> mask;
        if (mask_bytes)
            mask = std::span<const uint8_t>(*mask_bytes);
        probe.visual_probe =
            vision::color_histogram(vision::load_image(bytes, mask), cfg.vision_bins_per_channel);
    } catch (const Error& e) {
        probe.visual_error = e.what();
    }
}

} // namespace

std::string decision_to_json(const decision::AuthDecision& d) {
    return decision_fields(d).dump();
}

decision::ProbeInput probe_from_files(const std::string& rfid_tag, const std::string& audio_path,
                                      const std::string& image_path, const std::string& mask_path,
                                      const config::AppConfig& cfg) {
    decision::ProbeInput probe;
    probe.rfid_tag = rfid_tag;
    if (!audio_path.empty()) {
        std::string err;
        auto bytes = fetch_capture(audio_path, "", err);
        if (bytes)
            attach_audio(probe, *bytes, cfg);
        else
            probe.audio_error = err;
    }
    if (!image_path.empty()) {
        std::string err;
        auto bytes = fetch_capture(image_path, "", err);
        std::optional<std::vector<uint8_t>> mask_bytes;
        if (bytes && !mask_path.empty()) {
            std::string mask_err;
            mask_bytes = fetch_capture(mask_path, "", mask_err);
            if (!mask_bytes)
                err = mask_err;
        }
        if (bytes && err.empty())
            attach_image(probe, *bytes, mask_bytes, cfg);
        else
            probe.visual_error = err;
    } else if (!mask_path.empty()) {
        probe.visual_error = "mask given without an image";
    }
    return probe;
}

std::string handle_request_line(enroll::EnrollmentStore& store, const config::AppConfig& cfg,
                                const std::string& line) {
    auto started = std::chrono::steady_clock::now();

    std::string body = line;
    if (!body.empty() && body.back() == '\r')
        body.pop_back();
    if (body.empty())
        return error_line("empty request");

    ordered_json req;
    try {
        req = ordered_json::parse(body);
    } catch (const nlohmann::json::exception&) {
        return error_line("request is not valid JSON");
    }
    if (!req.is_object())
        return error_line("request must be a JSON object");

    std::string request_id;
    if (req.contains("request_id") && req.at("request_id").is_string())
        request_id = req.at("request_id").get<std::string>();
    try {
        for (const auto& [key, val] : req.items()) {
            static const char* known[] = {"request_id", "rfid_tag",   "audio_path",
                                          "audio_payload", "image_path", "image_payload",
                                          "mask_path", "mask_payload"};
            bool ok = false;
            for (const char* k : known)
                if (key == k)
                    ok = true;
            if (!ok)
                return error_line("unknown field: " + key, request_id);
            if (!val.is_string())
                return error_line("field " + key + " must be a string", request_id);
        }
        if (!req.contains("rfid_tag") || req.at("rfid_tag").get<std::string>().empty())
            return error_line("rfid_tag is required", request_id);
        if (req.contains("audio_path") && req.contains("audio_payload"))
            return error_line("give audio_path or audio_payload, not both", request_id);
        if (req.contains("image_path") && req.contains("image_payload"))
            return error_line("give image_path or image_payload, not both", request_id);
        if (req.contains("mask_path") && req.contains("mask_payload"))
            return error_line("give mask_path or mask_payload, not both", request_id);

        decision::ProbeInput probe;
        probe.rfid_tag = req.at("rfid_tag").get<std::string>();

        {
            std::string err;
            auto bytes =
                fetch_capture(req.value("audio_path", ""), req.value("audio_payload", ""), err);
            if (bytes)
                attach_audio(probe, *bytes, cfg);
            else if (!err.empty())
                probe.audio_error = err;
        }
        bool has_image = req.contains("image_path") || req.contains("image_payload");
        bool has_mask = req.contains("mask_path") || req.contains("mask_payload");
        if (has_image) {
            std::string err;
            auto bytes =
                fetch_capture(req.value("image_path", ""), req.value("image_payload", ""), err);
            std::optional<std::vector<uint8_t>> mask_bytes;
            if (bytes && has_mask) {
                std::string mask_err;
                mask_bytes =
                    fetch_capture(req.value("mask_path", ""), req.value("mask_payload", ""),
                                  mask_err);
                if (!mask_bytes)
                    err = mask_err;
            }
            if (bytes && err.empty())
                attach_image(probe, *bytes, mask_bytes, cfg);
            else
                probe.visual_error = err.empty() ? "empty image capture" : err;
        } else if (has_mask) {
            probe.visual_error = "mask given without an image";
        }

        decision::AuthOptions options;
        options.thresholds = cfg.thresholds;
        options.policy = cfg.policy;
        options.aggregation = cfg.identity_distance;
        options.refresh_on_accept = cfg.refresh_on_accept;
        options.max_refs = cfg.max_refs;

        decision::AuthDecision d = decision::authenticate(store, probe, options);
        if (!d.refresh_note.empty())
            std::cerr << "[gateway] " << d.refresh_note << '\n';

        auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - started)
                           .count();
        ordered_json resp;
        resp["request_id"] = request_id;
        resp.update(decision_fields(d));
        resp["elapsed_ms"] = elapsed;
        return resp.dump();
    } catch (const Error& e) {
        return error_line(e.what(), request_id);
    } catch (const std::exception& e) {
        return error_line(std::string("internal error: ") + e.what(), request_id);
    }
}

GatewayServer::GatewayServer(enroll::EnrollmentStore& store, config::AppConfig cfg)
    : store_(store), cfg_(std::move(cfg)) {}

GatewayServer::~GatewayServer() {
    stop();
}

void GatewayServer::start() {
    const std::string& bind_addr = cfg_.gateway.bind;
    size_t colon = bind_addr.rfind(':');
    if (colon == std::string::npos)
        raise(Errc::invalid_argument, "bind address must be host:port, got " + bind_addr);
    std::string host = bind_addr.substr(0, colon);
    std::string port_str = bind_addr.substr(colon + 1);
    int port = 0;
    try {
        size_t pos = 0;
        port = std::stoi(port_str, &pos);
        if (pos != port_str.size())
            throw std::invalid_argument(port_str);
    } catch (const std::exception&) {
        raise(Errc::invalid_argument, "bad port in bind address: " + bind_addr);
    }
    if (port < 0 || port > 65535)
        raise(Errc::invalid_argument, "port out of range: " + port_str);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (host.empty() || host == "*")
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
    else if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        raise(Errc::invalid_argument, "bad bind host: " + host);

    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0)
        raise(Errc::network, std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        int err = errno;
        ::close(fd);
        raise(Errc::network, "bind " + bind_addr + ": " + std::strerror(err));
    }
    if (::listen(fd, 64) < 0) {
        int err = errno;
        ::close(fd);
        raise(Errc::network, std::string("listen: ") + std::strerror(err));
    }
    socklen_t len = sizeof(addr);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0)
        port_ = ntohs(addr.sin_port);
    listen_fd_ = fd;
}

void GatewayServer::run() {
    const int listen_fd = listen_fd_.load();
    if (listen_fd < 0) {
        // stop() may legitimately win the race against a freshly spawned
        // run() thread; that is a clean shutdown, not a usage error.
        if (stopping_.load())
            return;
        raise(Errc::internal, "run() before start()");
    }
    while (!stopping_.load()) {
        {
            // Hold off on accepting while the worker cap is reached; pending
            // connections queue in the listen backlog.
            std::unique_lock lock(mutex_);
            idle_cv_.wait(lock, [this] {
                return stopping_.load() || active_ < cfg_.gateway.max_connections;
            });
            if (stopping_.load())
                break;
        }
        int fd = ::accept(listen_fd, nullptr, nullptr);
        if (fd < 0) {
            if (stopping_.load() || errno == EBADF || errno == EINVAL)
                break;
            if (errno == EINTR || errno == ECONNABORTED)
                continue;
            std::cerr << "[gateway] accept: " << std::strerror(errno) << '\n';
            continue;
        }
        std::lock_guard lock(mutex_);
        active_ += 1;
        workers_.emplace_back([this, fd] {
            serve_connection(fd);
            std::lock_guard inner(mutex_);
            active_ -= 1;
            idle_cv_.notify_all();
        });
    }

    std::vector<std::thread> workers;
    {
        std::lock_guard lock(mutex_);
        workers.swap(workers_);
    }
    for (auto& t : workers)
        if (t.joinable())
            t.join();
}

void GatewayServer::stop() {
    bool expected = false;
    if (!stopping_.compare_exchange_strong(expected, true))
        return;
    if (int fd = listen_fd_.exchange(-1); fd >= 0) {
        ::shutdown(fd, SHUT_RDWR);
        ::close(fd);
    }
    idle_cv_.notify_all();
}

bool GatewayServer::send_all(int fd, const std::string& data) {
    size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n <= 0)
            return false;
        sent += static_cast<size_t>(n);
    }
    return true;
}

void GatewayServer::serve_connection(int fd) {
    std::string buffer;
    char chunk[65536];
    const uint64_t cap = cfg_.gateway.max_request_bytes;
    bool open = true;
    while (open && !stopping_.load()) {
        size_t nl = buffer.find('\n');
        if (nl == std::string::npos) {
            if (buffer.size() > cap) {
                send_all(fd, error_line("request exceeds size cap") + "\n");
                break;
            }
            ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
            if (n <= 0)
                break;
            buffer.append(chunk, static_cast<size_t>(n));
            continue;
        }
        if (nl > cap) {
            send_all(fd, error_line("request exceeds size cap") + "\n");
            break;
        }
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        std::string response = handle_request_line(store_, cfg_, line);
        if (!send_all(fd, response + "\n"))
            break;
    }
    ::close(fd);
}

} // namespace opf::gateway
