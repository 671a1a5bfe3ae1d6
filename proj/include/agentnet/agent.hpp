#pragma once

#include <variant>

#include "agentnet/firmstore.hpp"
#include "agentnet/sha256.hpp"

namespace agentnet {

using AgentId = std::array<std::uint8_t, 16>;

inline constexpr const char* kBehaviorTrace = "trace.v1";
inline constexpr const char* kBehaviorSearch = "search.v1";
inline constexpr std::int64_t kMaxTtl = 64;

struct TraceGoal {
    ProductId product;
    bool operator==(const TraceGoal&) const = default;
};

struct SearchGoal {
    QueryCriteria criteria;
    std::optional<std::vector<FirmId>> visit; // explicit visit list, bypasses target resolution
    bool operator==(const SearchGoal&) const = default;
};

using GoalSpec = std::variant<TraceGoal, SearchGoal>;

// Visiting plan. Search routes are planned up front; traceability hops are
// discovered at each firm and only ever appended (fixed order).
struct Itinerary {
    std::vector<FirmId> planned;
    std::size_t position = 0; // index of next unvisited stop
    bool fixed = false;

    bool exhausted() const { return position >= planned.size(); }
    bool operator==(const Itinerary&) const = default;
};

enum class HopOutcome { Collected, NotHeld, Denied };

const char* hop_outcome_name(HopOutcome o);
std::optional<HopOutcome> hop_outcome_from_name(std::string_view name);

struct HopEntry {
    FirmId firm;
    Millis arrived_at = 0;
    AccessScope scope_granted = AccessScope::Minimal;
    HopOutcome outcome = HopOutcome::Collected;
    bool operator==(const HopEntry&) const = default;
};

// One collected item, tagged with the firm it was collected at. Exactly one
// of record/custody is set.
struct ResultItem {
    FirmId firm;
    std::optional<ProductRecord> record;
    std::optional<CustodyEvent> custody;
    bool operator==(const ResultItem&) const = default;
};

struct AgentCapsule {
    AgentId agent_id{};
    FirmId home;          // launching platform; the agent returns here
    std::string behavior; // platform-registered behavior id
    GoalSpec goal;
    Itinerary itinerary;
    std::vector<HopEntry> hops;
    std::vector<ResultItem> results;
    std::int64_t ttl = 0;
    Digest32 signature{}; // HMAC-SHA256 over the canonical encoding of all other fields

    bool operator==(const AgentCapsule&) const = default;

    std::string agent_id_hex() const { return to_hex(agent_id); }

    Doc to_doc(bool include_signature = true) const;
    // Throws CapsuleMalformed on any schema violation.
    static AgentCapsule from_doc(const Doc& d);
};

std::string encode_capsule(const AgentCapsule& capsule);
AgentCapsule decode_capsule(std::string_view bytes);

// The signature covers canonical_encode(to_doc(false)), keyed hop-by-hop:
// the launching platform signs toward the first stop and every forwarding
// platform re-signs toward the next one.
void sign_capsule(AgentCapsule& capsule, const Key32& key);
bool verify_capsule_signature(const AgentCapsule& capsule, const Key32& key);
// Signature check on raw payload bytes, independent of schema validation:
// parses just enough to strip the signature field and re-encode the rest.
bool verify_payload_signature(std::string_view payload, const Key32& key);

// Throws BadConfig on ttl out of (0, 64] or goal/itinerary mismatch.
AgentCapsule new_agent(const GoalSpec& goal, const FirmId& home, Itinerary itinerary,
                       std::int64_t ttl, const Key32& first_hop_key, const AgentId& agent_id);

struct NextMigrate {
    FirmId dest;
    bool operator==(const NextMigrate&) const = default;
};
struct NextReturnHome {
    bool operator==(const NextReturnHome&) const = default;
};
struct NextDone {
    bool operator==(const NextDone&) const = default;
};
using NextAction = std::variant<NextMigrate, NextReturnHome, NextDone>;

// Resource-agent view handed to behaviors: all store reads go through it and
// carry the granted scope.
class ScopedStoreAccess {
public:
    ScopedStoreAccess(const FirmStore& store, AccessScope scope) : store_(&store), scope_(scope) {}

    std::vector<ProductRecord> query(const QueryCriteria& criteria) const {
        return query_products(*store_, criteria, scope_);
    }
    CustodyLookup custody(const ProductId& product) const {
        return custody_lookup(*store_, product, scope_);
    }
    AccessScope scope() const { return scope_; }

private:
    const FirmStore* store_;
    AccessScope scope_;
};

struct ExecuteResult {
    AgentCapsule capsule;
    NextAction next;
};

// One platform visit: runs the capsule's behavior against the local store,
// appends results and the hop entry, burns one TTL unit, and decides the
// next action. Precondition: firm == itinerary.planned[position].
ExecuteResult execute_at(AgentCapsule capsule, const FirmId& firm, const ScopedStoreAccess& access,
                         Millis now);

// Defensive re-check of store filtering: keeps only records whose conjuncts
// are all verifiable and satisfied post-redaction. Contractive and stable.
std::vector<ProductRecord> local_filter(const std::vector<ProductRecord>& records,
                                        const QueryCriteria& criteria);

} // namespace agentnet
