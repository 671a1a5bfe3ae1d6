#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <thread>

#include "agentnet/runtime.hpp"

namespace agentnet {

// Optional live mode: every platform of the scenario binds its configured
// host:port in this process and speaks the framed wire protocol over real
// TCP. A session opens with a HELLO naming the sender; migrations retry
// with the platform's backoff across connection failures. Observable
// behavior matches the simulator; only the clock is real.
class SocketHost {
public:
    SocketHost(ScenarioData scenario, std::uint64_t seed);
    ~SocketHost();

    SocketHost(const SocketHost&) = delete;
    SocketHost& operator=(const SocketHost&) = delete;

    // Binds and serves every platform. Throws Undeliverable on bind failure.
    void start();
    void stop();

    // firm -> "host:port" actually bound (ports may be ephemeral).
    std::map<FirmId, std::string> endpoints() const;

    // HELLO to every keyed peer of every platform; true when all ACK.
    bool hello_mesh();

    // Launches a query from its home platform and waits for the homecoming
    // RESULT over TCP. Timeout is wall-clock.
    Report run_query(const QueryRequest& request, Millis timeout_ms = 15000);

    std::vector<RegistryEntry> registry(const FirmId& firm);

private:
    struct Listener;
    struct Waiter;

    void serve(Listener& listener);
    void session(int fd, const FirmId& self);
    void handle_reaction(const FirmId& firm, Reaction reaction);
    void dispatch_leg(const FirmId& from, OutboundTransfer out);
    void count_bytes(const FirmId& from, const FirmId& to, std::size_t n);
    Millis uptime_ms() const;

    ScenarioData scenario_;
    std::map<FirmId, PlatformNode> platforms_;
    std::map<FirmId, std::unique_ptr<std::mutex>> platform_mutex_;
    std::vector<std::unique_ptr<Listener>> listeners_;
    std::vector<std::thread> listener_threads_;
    std::vector<std::thread> workers_; // sessions and dispatch legs
    std::mutex workers_mutex_;

    std::mutex traffic_mutex_;
    std::map<std::pair<FirmId, FirmId>, std::uint64_t> sent_; // (from, to) -> bytes

    std::mutex waiters_mutex_;
    std::map<std::string, std::shared_ptr<Waiter>> waiters_; // agent id -> completion slot

    std::mt19937_64 rng_;
    std::atomic<bool> running_{false};
    std::chrono::steady_clock::time_point started_;
};

} // namespace agentnet
