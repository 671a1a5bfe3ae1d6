#pragma once

#include <functional>
#include <random>

#include "agentnet/interface.hpp"
#include "agentnet/planner.hpp"

namespace agentnet {

// Structured trace of everything the simulated system did, in virtual-time
// order. The harness asserts its invariants over this log.
struct LogEvent {
    enum class Kind {
        LaunchGranted,
        FrameSent,
        SendDown,
        RetryScheduled,
        FrameDelivered,
        AdmissionGranted,
        AdmissionRejected,
        ExecuteDone,
        ResultHome,
        ControlReceived,
        ControlLost,
        TicketCompleted,
        TicketFailed,
        Undeliverable,
        ErrorNotice,
    };

    Kind kind;
    Millis t = 0;
    FirmId firm;          // where it happened
    FirmId peer;          // other endpoint, for frame events
    std::string agent_id; // hex, when known
    std::string detail;   // scope, reject code, message type, free text
    std::size_t hop = 0;
};

const char* log_kind_name(LogEvent::Kind k);

// A user request as the interface agent receives it.
struct QueryRequest {
    bool is_trace = true;
    ProductId product; // trace
    QueryCriteria criteria;
    std::optional<std::vector<FirmId>> visit; // search: explicit visit order
    FirmId home;
    std::int64_t ttl = 16;

    Doc to_doc() const;
    static QueryRequest from_doc(const Doc& d);
};

// Validates a request against the scenario and builds the signed capsule
// for it: directory start for traces, explicit visit order or planned route
// for searches. Throws BadRequest / NoTargets / Unreachable / BadConfig /
// Undeliverable.
AgentCapsule build_query_capsule(const ScenarioData& scenario, const QueryRequest& request,
                                 const AgentId& agent_id);

// One-process deterministic multi-node run: every platform of the scenario
// on a shared virtual clock and event queue. Identical scenario and seed
// give an identical event log, byte counters and reports.
class SimRuntime {
public:
    SimRuntime(ScenarioData scenario, std::uint64_t seed);

    // Builds, signs and launches an agent for the request; returns its
    // ticket. Throws BadRequest / NoTargets / Unreachable / BadConfig.
    QueryTicket submit(const QueryRequest& request);

    // Drains the event queue (retries stop at the scenario horizon), then
    // fails any ticket still in flight.
    void run();

    const QueryTicket& ticket(const std::string& ticket_id) const;
    const Report& report(const std::string& ticket_id) const;
    std::vector<std::string> ticket_ids() const;

    std::vector<RegistryEntry> registry(const FirmId& firm) const;
    const std::vector<LogEvent>& log() const { return log_; }
    std::vector<LinkTraffic> traffic() const { return snapshot_traffic(network_); }
    PlatformNode& platform(const FirmId& firm);
    const ScenarioData& scenario() const { return scenario_; }
    Millis now() const { return clock_.now_ms; }

    // Fault injection: every TRANSFER delivery is duplicated once.
    void set_duplicate_transfers(bool on) { dup_transfers_ = on; }
    // Interim reports after every hop ("urgent information as soon as it is
    // available"); observational, costs no traffic.
    void set_progress_hook(std::function<void(const Report&)> hook) { progress_ = std::move(hook); }

private:
    struct Pending {
        FirmId from;
        FirmId to;
        MsgType type = MsgType::Transfer;
        std::string frame;
        std::string agent_id;
        std::size_t hop = 0;
        std::size_t attempt = 0;
        bool settled = false;
        bool duplicated = false;
    };

    struct TicketState {
        QueryTicket ticket;
        QueryRequest request;
        Doc echo;
        std::optional<Report> report;
        std::vector<LinkTraffic> traffic_before;
    };

    void start_dispatch(const FirmId& from, const OutboundTransfer& out);
    void attempt_send(std::size_t idx);
    void deliver(std::size_t idx, bool duplicate);
    void on_control(const FirmId& at, const std::string& payload);
    void handle_reaction(const FirmId& firm, Reaction reaction);
    void complete_ticket(const AgentCapsule& capsule);
    void fail_ticket(const std::string& agent_id_hex, const std::string& reason);
    void undeliverable(std::size_t idx, const std::string& why);
    void report_progress(const AgentCapsule& capsule);
    TicketState* state_by_agent(const std::string& agent_id_hex);
    std::vector<LinkTraffic> traffic_since(const std::vector<LinkTraffic>& before) const;
    AgentId next_agent_id();
    void log_event(LogEvent::Kind kind, const FirmId& firm, const FirmId& peer,
                   const std::string& agent, const std::string& detail, std::size_t hop = 0);

    ScenarioData scenario_;
    SimNetwork network_;
    VirtualClock clock_;
    EventQueue queue_;
    std::map<FirmId, PlatformNode> platforms_;
    std::vector<Pending> pending_;
    std::map<std::tuple<FirmId, std::string, std::size_t>, std::size_t> pending_index_;
    std::map<std::string, TicketState> tickets_;
    std::map<std::string, std::string> ticket_by_agent_;
    std::vector<LogEvent> log_;
    std::mt19937_64 rng_;
    std::uint64_t ticket_counter_ = 0;
    bool dup_transfers_ = false;
    std::function<void(const Report&)> progress_;
};

} // namespace agentnet
