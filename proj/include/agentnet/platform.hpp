#pragma once

#include <deque>
#include <functional>
#include <set>
#include <unordered_set>

#include "agentnet/agent.hpp"
#include "agentnet/wire.hpp"

namespace agentnet {

struct PlatformConfig {
    FirmId firm;
    std::map<FirmId, Key32> keys;         // one pre-shared key per known peer
    std::map<FirmId, TrustLevel> trust;   // peers absent from the map are Unknown
    std::set<std::string> behavior_whitelist{kBehaviorTrace, kBehaviorSearch};
    std::int64_t ttl_cap = kMaxTtl;
    std::vector<Millis> retry_backoff_ms{100, 200, 400, 800, 1600}; // then repeat last
    std::string host_port; // optional; socket mode only

    Millis backoff_at(std::size_t attempt) const;
};

enum class RejectCode {
    BadSignature,
    UnknownOrigin,
    SchemaInvalid,
    BehaviorNotAllowed,
    TtlExhausted,
    Replay,
};

const char* reject_code_name(RejectCode c);
std::optional<RejectCode> reject_code_from_name(std::string_view name);

struct Granted {
    AccessScope scope;
};
struct Rejected {
    RejectCode code;
};
using Admission = std::variant<Granted, Rejected>;

// Trust mapped to scope, from the agent's OWNING firm: Trusted->Full,
// Known->Standard, absent/Unknown->Minimal. A platform grants its own
// agents Full (a firm is not a peer of itself and trusts itself).
AccessScope assign_scope(const FirmId& origin, const PlatformConfig& config);

// Duplicate-delivery defense: a bounded LRU window over admission keys.
// Keys combine agent id and hop index, so a retried frame is a replay while
// a lawful later visit by the same agent (longer hop log) is not.
class ReplayWindow {
public:
    explicit ReplayWindow(std::size_t capacity = 1024) : capacity_(capacity) {}

    bool contains(const std::string& key) const { return set_.count(key) != 0; }
    void insert(const std::string& key);

private:
    std::size_t capacity_;
    std::unordered_set<std::string> set_;
    std::deque<std::string> order_;
};

enum class AdmitKind {
    Transfer, // migration: the full check pipeline
    Result,   // homecoming delivery: no behavior/ttl checks, nothing executes
};

struct AdmitOutcome {
    Admission admission;
    std::optional<AgentCapsule> capsule; // decoded capsule; set unless rejected before decode
};

// The supervisor's admission pipeline, in check order: origin key known ->
// signature verifies -> capsule decodes and is schema-valid -> behavior
// whitelisted -> ttl in (0, ttl_cap] -> not a replay. The first failing
// check names the rejection; admission never throws.
AdmitOutcome admit(std::string_view payload, const FirmId& claimed_origin,
                   const PlatformConfig& config, ReplayWindow& window,
                   AdmitKind kind = AdmitKind::Transfer);

enum class RegistryState { Running, AwaitingTransfer, Departed, Rejected };

const char* registry_state_name(RegistryState s);

struct RegistryEntry {
    std::string agent_id_hex;
    FirmId origin; // the agent's home firm
    std::string behavior;
    RegistryState state = RegistryState::Running;
    Millis admitted_at = 0;
    std::uint64_t seq = 0; // registration order, tie-break for snapshots
};

// What a platform wants sent next, produced by running an admitted agent.
struct OutboundTransfer {
    FirmId dest;
    MsgType type = MsgType::Transfer; // Transfer (next hop) or Result (homecoming)
    std::string payload;
    std::string agent_id_hex;
    std::size_t hop_index = 0; // hops completed when this leg was produced
};

struct ErrorNotice {
    std::string agent_id_hex;
    std::string message;
};

// Everything a platform decided in reaction to one inbound frame or launch.
struct Reaction {
    std::optional<Admission> admission;
    std::optional<std::pair<MsgType, std::string>> reply; // ACK/REJECT toward the sender
    std::optional<OutboundTransfer> outbound;
    std::optional<AgentCapsule> delivered_home; // capsule arrived back at its home platform
    std::optional<ErrorNotice> error_notice;    // agent failure surfaced to the local interface
    std::optional<std::string> executed_agent;  // agent id hex, when a behavior ran
    std::optional<AgentCapsule> executed_capsule; // post-execution snapshot (progress reporting)
};

// Behaviors are platform-registered implementations selected by capsule
// behavior id; agents carry state, never code.
using BehaviorFn =
    std::function<ExecuteResult(AgentCapsule, const FirmId&, const ScopedStoreAccess&, Millis)>;

// One firm's platform node: admission, trust-derived execution scopes, the
// agent registry, and framing of outbound transfers. Transport-agnostic;
// a driver (simulator or socket host) moves the frames.
class PlatformNode {
public:
    PlatformNode(PlatformConfig config, FirmStore store);

    const FirmId& firm() const { return config_.firm; }
    const PlatformConfig& config() const { return config_; }
    const FirmStore& store() const { return store_; }

    void register_behavior(const std::string& id, BehaviorFn fn);

    // Inbound TRANSFER or RESULT payload from a peer.
    Reaction on_frame(MsgType type, std::string_view payload, const FirmId& sender, Millis now);

    // Launches one of this platform's own agents. Local admission is implied
    // (scope Full); if the first stop is this firm the behavior runs here
    // before any frame leaves.
    Reaction launch(AgentCapsule capsule, Millis now);

    // Runs an admitted capsule once and decides the outbound intent.
    Reaction run_agent(AgentCapsule capsule, AccessScope scope, Millis now);

    // Delivery confirmation for an outbound leg (ACK, or REJECT{Replay}
    // which proves the receiver already holds the agent).
    void on_outbound_settled(const std::string& agent_id_hex);
    // Permanent outbound failure.
    void on_outbound_failed(const std::string& agent_id_hex);

    // Point-in-time registry view, sorted by admitted_at (FIFO on ties).
    std::vector<RegistryEntry> registry_snapshot() const;

    ReplayWindow& replay_window() { return replay_; }

private:
    RegistryEntry& upsert_entry(const AgentCapsule& capsule, Millis now);
    void set_state(const std::string& agent_id_hex, RegistryState state);
    OutboundTransfer frame_toward(const AgentCapsule& capsule, const FirmId& dest, MsgType type);
    Reaction settle_locally(AgentCapsule capsule, Millis now, Reaction reaction);

    PlatformConfig config_;
    FirmStore store_;
    ReplayWindow replay_;
    std::vector<RegistryEntry> registry_;
    std::map<std::string, BehaviorFn> behaviors_;
    std::uint64_t next_seq_ = 0;
};

// Payload helpers for the control and error frames.
std::string make_ack_payload(const std::string& agent_id_hex, std::size_t hop_index);
std::string make_reject_payload(const std::string& agent_id_hex, std::size_t hop_index,
                                RejectCode code);
std::string make_error_result_payload(const std::string& agent_id_hex, const FirmId& at_firm,
                                      std::size_t hop_index, const std::string& message);

} // namespace agentnet
