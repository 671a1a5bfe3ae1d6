#pragma once

#include "agentnet/agent.hpp"
#include "agentnet/simnet.hpp"

namespace agentnet {

enum class TicketStatus { InFlight, Completed, Failed };

const char* ticket_status_name(TicketStatus s);

struct QueryTicket {
    std::string ticket_id;
    std::string agent_id_hex;
    Millis submitted_at = 0;
    TicketStatus status = TicketStatus::InFlight;
    std::string failure_reason; // set when Failed
};

struct ReportSection {
    FirmId firm;
    std::vector<ProductRecord> records;
    std::vector<CustodyEvent> custody;
};

// The interface agent's consolidated view of one query: deduplicated
// results grouped per firm, the custody chain for traces, the hop log, and
// the traffic this query cost.
struct Report {
    Doc query_echo = Doc::object();
    std::string status = "InFlight";
    std::string failure_reason;
    std::string agent_id_hex;
    FirmId home;
    std::optional<std::vector<FirmId>> chain; // origin -> current; traces only
    bool chain_complete = false;
    std::vector<ReportSection> sections; // ascending firm
    std::vector<HopEntry> hops;
    std::vector<LinkTraffic> traffic;
    std::uint64_t traffic_total_bytes = 0;

    Doc to_doc() const;
};

// Deduplicates by (record kind, product, collecting firm), merges per-firm
// sections, and orders the trace chain origin-first. Idempotent:
// aggregate of a capsule whose results repeat equals the single copy.
Report aggregate(const AgentCapsule& capsule, const Doc& query_echo, bool partial,
                 std::vector<LinkTraffic> traffic);

Report failure_report(const Doc& query_echo, const FirmId& home, const std::string& agent_id_hex,
                      const std::string& reason);

// Stable human-readable tables.
std::string render_text(const Report& report);
// Canonical bytes of the report document; byte-identical for equal reports.
std::string render_structured(const Report& report);

} // namespace agentnet
