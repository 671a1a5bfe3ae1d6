#include "agentnet/interface.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace agentnet {

const char* ticket_status_name(TicketStatus s) {
    switch (s) {
    case TicketStatus::InFlight: return "InFlight";
    case TicketStatus::Completed: return "Completed";
    case TicketStatus::Failed: break;
    }
    return "Failed";
}

namespace {

Doc hop_doc(const HopEntry& h) {
    Doc d = Doc::object();
    d["firm"] = h.firm;
    d["arrived_at"] = h.arrived_at;
    d["scope_granted"] = scope_name(h.scope_granted);
    d["outcome"] = hop_outcome_name(h.outcome);
    return d;
}

// Orders collected custody events into a chain segment, origin side first.
// The segment is complete when it starts at the origin and ends at the
// current holder.
std::pair<std::vector<FirmId>, bool> assemble_chain(std::vector<CustodyEvent> events) {
    std::vector<FirmId> chain;
    if (events.empty()) {
        return {chain, false};
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const CustodyEvent& x, const CustodyEvent& y) { return x.received_at < y.received_at; });
    std::map<FirmId, const CustodyEvent*> by_firm;
    for (const auto& e : events) {
        by_firm.emplace(e.firm, &e);
    }
    const CustodyEvent* start = nullptr;
    for (const auto& e : events) {
        if (!e.received_from || by_firm.find(*e.received_from) == by_firm.end()) {
            start = &e;
            break;
        }
    }
    if (!start) {
        start = &events.front();
    }
    std::set<FirmId> seen;
    const CustodyEvent* cur = start;
    const CustodyEvent* last = start;
    while (cur && seen.insert(cur->firm).second) {
        chain.push_back(cur->firm);
        last = cur;
        if (!cur->shipped_to) {
            break;
        }
        auto it = by_firm.find(*cur->shipped_to);
        cur = it == by_firm.end() ? nullptr : it->second;
    }
    bool complete = !start->received_from && !last->shipped_to && chain.size() == by_firm.size();
    return {chain, complete};
}

} // namespace

Report aggregate(const AgentCapsule& capsule, const Doc& query_echo, bool partial,
                 std::vector<LinkTraffic> traffic) {
    Report report;
    report.query_echo = query_echo;
    report.status = partial ? "InFlight" : "Completed";
    report.agent_id_hex = capsule.agent_id_hex();
    report.home = capsule.home;
    report.hops = capsule.hops;
    report.traffic = std::move(traffic);
    report.traffic_total_bytes = traffic_total(report.traffic);

    // Dedup key: (record kind, product, collecting firm).
    std::set<std::tuple<std::string, ProductId, FirmId>> seen;
    std::map<FirmId, ReportSection> sections;
    std::vector<CustodyEvent> trace_events;
    for (const auto& item : capsule.results) {
        if (item.record) {
            if (!seen.insert({"record", item.record->product, item.firm}).second) {
                continue;
            }
            sections[item.firm].records.push_back(*item.record);
        } else if (item.custody) {
            if (!seen.insert({"custody", item.custody->product, item.firm}).second) {
                continue;
            }
            sections[item.firm].custody.push_back(*item.custody);
            trace_events.push_back(*item.custody);
        }
    }
    for (auto& [firm, section] : sections) {
        section.firm = firm;
        std::sort(section.records.begin(), section.records.end(),
                  [](const ProductRecord& x, const ProductRecord& y) { return x.product < y.product; });
        std::sort(section.custody.begin(), section.custody.end(),
                  [](const CustodyEvent& x, const CustodyEvent& y) {
                      return std::tie(x.product, x.received_at) < std::tie(y.product, y.received_at);
                  });
        report.sections.push_back(std::move(section));
    }

    if (std::holds_alternative<TraceGoal>(capsule.goal)) {
        auto [chain, complete] = assemble_chain(std::move(trace_events));
        report.chain = std::move(chain);
        report.chain_complete = complete;
    }
    return report;
}

Report failure_report(const Doc& query_echo, const FirmId& home, const std::string& agent_id_hex,
                      const std::string& reason) {
    Report report;
    report.query_echo = query_echo;
    report.status = "Failed";
    report.failure_reason = reason;
    report.agent_id_hex = agent_id_hex;
    report.home = home;
    return report;
}

Doc Report::to_doc() const {
    Doc d = Doc::object();
    d["query"] = query_echo;
    d["status"] = status;
    if (!failure_reason.empty()) {
        d["failure_reason"] = failure_reason;
    }
    d["agent_id"] = agent_id_hex;
    d["home"] = home;
    if (chain) {
        d["chain"] = *chain;
        d["chain_complete"] = chain_complete;
    }
    Doc sections_doc = Doc::array();
    for (const auto& s : sections) {
        Doc sd = Doc::object();
        sd["firm"] = s.firm;
        Doc records = Doc::array();
        for (const auto& r : s.records) records.push_back(r.to_doc());
        sd["records"] = records;
        Doc custody = Doc::array();
        for (const auto& c : s.custody) custody.push_back(c.to_doc());
        sd["custody"] = custody;
        sections_doc.push_back(sd);
    }
    d["sections"] = sections_doc;
    Doc hops_doc = Doc::array();
    for (const auto& h : hops) hops_doc.push_back(hop_doc(h));
    d["hops"] = hops_doc;
    Doc traffic_doc = Doc::object();
    traffic_doc["total_bytes"] = traffic_total_bytes;
    Doc links = Doc::array();
    for (const auto& row : traffic) {
        Doc l = Doc::object();
        l["a"] = row.a;
        l["b"] = row.b;
        l["a_to_b"] = row.a_to_b;
        l["b_to_a"] = row.b_to_a;
        links.push_back(l);
    }
    traffic_doc["links"] = links;
    d["traffic"] = traffic_doc;
    return d;
}

namespace {

std::string record_line(const ProductRecord& r) {
    std::ostringstream out;
    out << r.product << "  category=" << r.category;
    if (r.supplier) out << "  supplier=" << *r.supplier;
    if (r.manufacture_date) out << "  made=" << *r.manufacture_date;
    for (const auto& [k, v] : r.attributes) out << "  " << k << "=" << v;
    for (const auto& [k, v] : r.commercial) out << "  commercial." << k << "=" << v;
    return out.str();
}

std::string custody_line(const CustodyEvent& e) {
    std::ostringstream out;
    out << e.product << "  held-by=" << e.firm;
    if (e.received_from) out << "  from=" << *e.received_from;
    out << "  received=" << e.received_at;
    if (e.shipped_to) out << "  to=" << *e.shipped_to;
    if (e.shipped_at) out << "  shipped=" << *e.shipped_at;
    return out.str();
}

} // namespace

std::string render_text(const Report& report) {
    std::ostringstream out;
    out << "query: " << canonical_encode(report.query_echo) << "\n";
    out << "status: " << report.status;
    if (!report.failure_reason.empty()) out << " (" << report.failure_reason << ")";
    out << "\n";
    out << "agent: " << report.agent_id_hex << "  home: " << report.home << "\n";
    if (report.chain) {
        out << "chain: ";
        for (std::size_t i = 0; i < report.chain->size(); ++i) {
            if (i) out << " -> ";
            out << (*report.chain)[i];
        }
        if (report.chain->empty()) out << "(none)";
        out << (report.chain_complete ? "  [complete]" : "  [partial]") << "\n";
    }
    if (!report.hops.empty()) {
        out << "hops:\n";
        std::size_t i = 1;
        for (const auto& h : report.hops) {
            out << "  " << i++ << ". " << h.firm << "  t=" << h.arrived_at
                << "  scope=" << scope_name(h.scope_granted)
                << "  outcome=" << hop_outcome_name(h.outcome) << "\n";
        }
    }
    if (!report.sections.empty()) {
        out << "results:\n";
        for (const auto& s : report.sections) {
            out << "  firm " << s.firm << ":\n";
            for (const auto& r : s.records) out << "    record  " << record_line(r) << "\n";
            for (const auto& c : s.custody) out << "    custody " << custody_line(c) << "\n";
        }
    }
    out << "traffic: " << report.traffic_total_bytes << " bytes\n";
    for (const auto& row : report.traffic) {
        out << "  " << row.a << "-" << row.b << ": " << row.a_to_b << "/" << row.b_to_a << "\n";
    }
    return out.str();
}

std::string render_structured(const Report& report) {
    return canonical_encode(report.to_doc());
}

} // namespace agentnet
