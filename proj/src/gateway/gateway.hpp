#pragma once

#include "core/config.hpp"
#include "core/decision.hpp"
#include "core/enrollment.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace opf::gateway {

// Runs probe extraction and authentication for one request line and renders
// the one-line response. Never throws: every failure mode becomes either an
// error response or a deny verdict. Exposed separately from the socket layer
// so the protocol is testable without networking.
std::string handle_request_line(enroll::EnrollmentStore& store, const config::AppConfig& cfg,
                                const std::string& line);

// Decision rendered as one JSON line: {verdict, identity_id, outcomes,
// policy, reason}.
std::string decision_to_json(const decision::AuthDecision& d);

// Builds the probe that `verify` and the daemon both feed to the decision
// pipeline, so CLI and daemon verdicts match for identical inputs. Unreadable
// captures land in the probe's error slots rather than throwing.
decision::ProbeInput probe_from_files(const std::string& rfid_tag, const std::string& audio_path,
                                      const std::string& image_path, const std::string& mask_path,
                                      const config::AppConfig& cfg);

// Newline-delimited request/response daemon over TCP. One worker thread per
// connection, at most cfg.gateway.max_connections at a time; further
// connections wait in the listen backlog.
class GatewayServer {
public:
    GatewayServer(enroll::EnrollmentStore& store, config::AppConfig cfg);
    ~GatewayServer();

    GatewayServer(const GatewayServer&) = delete;
    GatewayServer& operator=(const GatewayServer&) = delete;

    // Binds and listens on cfg.gateway.bind ("host:port"; port 0 picks an
    // ephemeral port, see port()).
    void start();
    uint16_t port() const { return port_; }

    // Blocking accept loop; returns after stop().
    void run();
    void stop();

private:
    void serve_connection(int fd);
    bool send_all(int fd, const std::string& data);

    enroll::EnrollmentStore& store_;
    config::AppConfig cfg_;
    std::atomic<int> listen_fd_{-1};
    uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};

    std::mutex mutex_;
    std::condition_variable idle_cv_;
    uint32_t active_ = 0;
    std::vector<std::thread> workers_;
};

} // namespace opf::gateway
