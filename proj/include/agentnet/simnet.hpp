#pragma once

#include <functional>
#include <queue>
#include <variant>
#include <vector>

#include "agentnet/domain.hpp"

namespace agentnet {

struct VirtualClock {
    Millis now_ms = 0;
};

struct ScheduleEntry {
    Millis from_ms = 0;
    bool up = true;
};

// Bidirectional point-to-point link with an up/down schedule and exact
// per-direction byte counters. Before the first schedule entry (and with an
// empty schedule) the link is up.
struct SimLink {
    FirmId a;
    FirmId b;
    Millis latency_ms = 0;
    std::vector<ScheduleEntry> schedule; // from_ms strictly increasing
    std::uint64_t bytes_a_to_b = 0;
    std::uint64_t bytes_b_to_a = 0;

    bool up_at(Millis t) const;
    // First instant >= t at which the link is up; nullopt if it never is.
    std::optional<Millis> next_up_at(Millis t) const;
};

struct Delivered {
    Millis at_ms;
};
struct Down {};
using SendOutcome = std::variant<Delivered, Down>;

// Attempts a send at clock.now_ms. Up: counts the bytes in the from->other
// direction and delivers at now + latency. Down: the connection attempt
// fails and no bytes are counted.
SendOutcome link_send(SimLink& link, const FirmId& from, std::string_view frame_bytes,
                      const VirtualClock& clock);

// Discrete-event queue ordered by (time, insertion sequence); the sequence
// tie-break makes runs deterministic.
class EventQueue {
public:
    void schedule(Millis at, std::function<void()> fn);
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    Millis peek_time() const;
    // Pops the earliest event, advances the clock to its time, runs it.
    // Throws QueueEmpty when there is nothing to run.
    void run_next(VirtualClock& clock);

private:
    struct Ev {
        Millis at;
        std::uint64_t seq;
        std::function<void()> fn;
    };
    struct Later {
        bool operator()(const Ev& x, const Ev& y) const {
            if (x.at != y.at) return x.at > y.at;
            return x.seq > y.seq;
        }
    };
    std::priority_queue<Ev, std::vector<Ev>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

// The in-process network: every link of a scenario, addressable by endpoint
// pair in either order.
class SimNetwork {
public:
    explicit SimNetwork(std::vector<SimLink> links);

    SimLink* find_link(const FirmId& x, const FirmId& y);
    const SimLink* find_link(const FirmId& x, const FirmId& y) const;

    std::uint64_t total_bytes() const;
    const std::vector<SimLink>& links() const { return links_; }
    void reset_counters();

private:
    std::vector<SimLink> links_;
};

// Per-link byte counter snapshot, stable (a, b) order.
struct LinkTraffic {
    FirmId a;
    FirmId b;
    std::uint64_t a_to_b = 0;
    std::uint64_t b_to_a = 0;

    std::uint64_t both() const { return a_to_b + b_to_a; }
    bool operator==(const LinkTraffic&) const = default;
};

std::vector<LinkTraffic> snapshot_traffic(const SimNetwork& network);
// after - before, rows with any traffic only.
std::vector<LinkTraffic> diff_traffic(const std::vector<LinkTraffic>& before,
                                      const std::vector<LinkTraffic>& after);
std::uint64_t traffic_total(const std::vector<LinkTraffic>& rows);

} // namespace agentnet
