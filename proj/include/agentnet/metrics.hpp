#pragma once

#include "agentnet/runtime.hpp"

namespace agentnet {

// Ground truth computed centrally from the union of all stores; no network,
// no agents. The verification spine for the end-to-end properties.
struct OracleResult {
    std::vector<FirmId> chain;              // trace: origin first
    std::vector<CustodyEvent> chain_events; // trace: same order
    std::vector<std::pair<FirmId, ProductRecord>> records; // search: (firm, redacted record), sorted
};

// scope_override forces one scope at every firm; otherwise each target's
// scope derives from its trust in the querying home, exactly as a platform
// would grant it.
OracleResult centralized_oracle(const ScenarioData& scenario, const QueryRequest& query,
                                std::optional<AccessScope> scope_override = std::nullopt);

// The scope a platform at `firm` grants to agents of `home`.
AccessScope scope_granted_at(const ScenarioData& scenario, const FirmId& firm, const FirmId& home);

// Flattened (collecting firm, record) pairs of a report, sorted like the
// oracle's record list.
std::vector<std::pair<FirmId, ProductRecord>> flatten_records(const Report& report);

struct BaselineRun {
    std::vector<std::pair<FirmId, ProductRecord>> records; // filtered locally at home
    std::vector<FirmId> chain;                             // trace: chain built at home
    std::vector<LinkTraffic> traffic;
    std::uint64_t total_bytes = 0;
    Millis completion_ms = 0;
};

// The message-exchange reference: the home platform pulls every target
// firm's full product table (full custody log for traces) over the same
// framed protocol and filters locally. Same links, same schedules, same
// retry policy; bytes counted on an independent counter set.
BaselineRun baseline_fetch(const ScenarioData& scenario, const QueryRequest& query);

struct TrafficReport {
    Doc query_echo;
    std::vector<LinkTraffic> agent_per_link;
    std::uint64_t agent_total = 0;
    std::vector<LinkTraffic> baseline_per_link;
    std::uint64_t baseline_total = 0;
    std::uint64_t ratio_num = 0; // agent_total / baseline_total, reduced
    std::uint64_t ratio_den = 0;
    std::size_t hops = 0;

    Doc to_doc() const;
};

// Agent run and baseline run over identical link schedules, independent
// counters. Throws Undeliverable when either run cannot complete.
TrafficReport run_comparison(const ScenarioData& scenario, const QueryRequest& query,
                             std::uint64_t seed);

struct IntermittencyLog {
    bool completed = false;
    std::string failure;
    Millis completion_ms = 0;
    int retries = 0;
    int replay_rejections = 0;
    int max_admissions_per_hop = 0; // over (agent, hop) pairs
    Report report;
    std::vector<LogEvent> log;
};

// Runs one query on a scenario with scripted down-windows, optionally
// injecting duplicate TRANSFER frames, and summarizes delivery behavior.
IntermittencyLog run_intermittency(const ScenarioData& scenario, const QueryRequest& query,
                                   std::uint64_t seed, bool inject_duplicates);

} // namespace agentnet
