#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "agentnet/metrics.hpp"
#include "agentnet/runtime.hpp"
#include "helpers.hpp"

using namespace agentnet;
using namespace agentnet::testing;

namespace {

QueryRequest trace_req(const ProductId& product, const FirmId& home, std::int64_t ttl = 16) {
    QueryRequest q;
    q.is_trace = true;
    q.product = product;
    q.home = home;
    q.ttl = ttl;
    return q;
}

std::vector<FirmId> execution_order(const std::vector<LogEvent>& log, const std::string& agent) {
    std::vector<FirmId> order;
    for (const auto& ev : log) {
        if (ev.kind == LogEvent::Kind::ExecuteDone && ev.agent_id == agent) {
            order.push_back(ev.firm);
        }
    }
    return order;
}

Doc with_link_schedule(Doc doc, const FirmId& a, const FirmId& b, std::vector<ScheduleEntry> sched) {
    for (auto& link : doc["links"]) {
        if ((link["a"] == a && link["b"] == b) || (link["a"] == b && link["b"] == a)) {
            Doc s = Doc::array();
            for (const auto& e : sched) {
                s.push_back(Doc::object({{"from_ms", e.from_ms}, {"up", e.up}}));
            }
            link["schedule"] = s;
        }
    }
    return doc;
}

} // namespace

TEST_CASE("S1 trace end to end: visits D, B, A and reports chain A->B->D") {
    SimRuntime rt(load_s1(), 1);
    QueryTicket ticket = rt.submit(trace_req("P-100", "C"));
    rt.run();

    CHECK(rt.ticket(ticket.ticket_id).status == TicketStatus::Completed);
    const Report& report = rt.report(ticket.ticket_id);
    REQUIRE(report.chain);
    CHECK(*report.chain == std::vector<FirmId>{"A", "B", "D"});
    CHECK(report.chain_complete);
    CHECK(execution_order(rt.log(), ticket.agent_id_hex) == std::vector<FirmId>{"D", "B", "A"});

    // reverse(chain) equals the agent's visiting order
    std::vector<FirmId> reversed(report.chain->rbegin(), report.chain->rend());
    CHECK(reversed == execution_order(rt.log(), ticket.agent_id_hex));
    CHECK(report.traffic_total_bytes > 0);
}

TEST_CASE("every execution is preceded by a grant for that agent at that firm") {
    SimRuntime rt(load_s1(), 3);
    rt.submit(trace_req("P-100", "C"));
    QueryRequest search;
    search.is_trace = false;
    search.home = "A";
    search.criteria.category = "bearing";
    rt.submit(search);
    rt.run();

    std::set<std::pair<std::string, FirmId>> granted;
    for (const auto& ev : rt.log()) {
        if (ev.kind == LogEvent::Kind::AdmissionGranted || ev.kind == LogEvent::Kind::LaunchGranted) {
            granted.insert({ev.agent_id, ev.firm});
        }
        if (ev.kind == LogEvent::Kind::ExecuteDone) {
            CHECK(granted.count({ev.agent_id, ev.firm}) == 1);
        }
    }
}

TEST_CASE("trace whose home holds the product never touches the network") {
    SimRuntime rt(load_s1(), 4);
    QueryTicket ticket = rt.submit(trace_req("P-300", "D"));
    rt.run();
    CHECK(rt.ticket(ticket.ticket_id).status == TicketStatus::Completed);
    const Report& report = rt.report(ticket.ticket_id);
    REQUIRE(report.chain);
    CHECK(*report.chain == std::vector<FirmId>{"D"});
    CHECK(report.traffic_total_bytes == 0);
}

TEST_CASE("trace through a chain that crosses the home firm") {
    // P-200 chain is C -> D; trace from home C starts at D and walks back
    // into its own platform, then the result is delivered locally.
    SimRuntime rt(load_s1(), 5);
    QueryTicket ticket = rt.submit(trace_req("P-200", "C"));
    rt.run();
    CHECK(rt.ticket(ticket.ticket_id).status == TicketStatus::Completed);
    const Report& report = rt.report(ticket.ticket_id);
    REQUIRE(report.chain);
    CHECK(*report.chain == std::vector<FirmId>{"C", "D"});
    CHECK(execution_order(rt.log(), ticket.agent_id_hex) == std::vector<FirmId>{"D", "C"});
}

TEST_CASE("search agent respects scopes granted per firm") {
    // Home A: B trusts A as Trusted (Full), D as Known (Standard).
    SimRuntime rt(load_s1(), 6);
    QueryRequest q;
    q.is_trace = false;
    q.home = "A";
    q.criteria.category = "bearing";
    q.visit = std::vector<FirmId>{"B", "D"};
    QueryTicket ticket = rt.submit(q);
    rt.run();
    const Report& report = rt.report(ticket.ticket_id);
    for (const auto& hop : report.hops) {
        if (hop.firm == "B") CHECK(hop.scope_granted == AccessScope::Full);
        if (hop.firm == "D") CHECK(hop.scope_granted == AccessScope::Standard);
    }
    for (const auto& section : report.sections) {
        for (const auto& record : section.records) {
            if (section.firm == "D") {
                CHECK(record.commercial.empty()); // Standard redaction
            }
        }
    }
}

TEST_CASE("search route from the planner: supplier A from home C runs B then D") {
    SimRuntime rt(load_s1(), 16);
    QueryRequest q;
    q.is_trace = false;
    q.home = "C";
    q.criteria.supplier = "A";
    q.criteria.category = "bearing";
    QueryTicket ticket = rt.submit(q);
    rt.run();
    const Report& report = rt.report(ticket.ticket_id);
    REQUIRE(report.hops.size() == 2);
    CHECK(report.hops[0].firm == "B"); // C-B 5 + B-D 4 beats C-D 20 + D-B 4
    CHECK(report.hops[1].firm == "D");
}

TEST_CASE("two concurrent agents leave two registry entries") {
    SimRuntime rt(load_s1(), 7);
    QueryTicket t1 = rt.submit(trace_req("P-100", "C"));
    QueryTicket t2 = rt.submit(trace_req("P-201", "C"));
    CHECK(t1.agent_id_hex != t2.agent_id_hex);
    rt.run();
    auto entries = rt.registry("D"); // both traces start at D
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].agent_id_hex != entries[1].agent_id_hex);
    for (const auto& e : entries) {
        CHECK(e.state == RegistryState::Departed);
    }
}

TEST_CASE("link down then up: delivery at the first retry after uplink") {
    // C-D down for [0, 5000), up from 5000. Backoffs probe at 100, 300,
    // 700, 1500, 3100, 6300 : first probe at or after 5000 is 6300.
    Doc doc = with_link_schedule(s1_doc(), "C", "D", {{0, false}, {5000, true}});
    SimRuntime rt(ingest_scenario(doc), 8);
    QueryTicket ticket = rt.submit(trace_req("P-100", "C"));
    rt.run();
    CHECK(rt.ticket(ticket.ticket_id).status == TicketStatus::Completed);

    Millis first_delivery = -1;
    int retries = 0;
    for (const auto& ev : rt.log()) {
        if (ev.kind == LogEvent::Kind::RetryScheduled) ++retries;
        if (ev.kind == LogEvent::Kind::FrameDelivered && first_delivery < 0 && ev.firm == "D") {
            first_delivery = ev.t;
        }
    }
    CHECK(retries >= 6);
    CHECK(first_delivery == 6300 + 20); // first up probe + C-D latency
}

TEST_CASE("all links up means zero retries") {
    SimRuntime rt(load_s1(), 9);
    rt.submit(trace_req("P-100", "C"));
    rt.run();
    for (const auto& ev : rt.log()) {
        CHECK(ev.kind != LogEvent::Kind::RetryScheduled);
        CHECK(ev.kind != LogEvent::Kind::SendDown);
    }
}

TEST_CASE("duplicated frames: exactly one execution per hop, replay rejected") {
    SimRuntime clean(load_s1(), 10);
    QueryTicket clean_ticket = clean.submit(trace_req("P-100", "C"));
    clean.run();
    std::string clean_bytes = render_structured(clean.report(clean_ticket.ticket_id));

    SimRuntime dup(load_s1(), 10);
    dup.set_duplicate_transfers(true);
    QueryTicket ticket = dup.submit(trace_req("P-100", "C"));
    dup.run();

    CHECK(dup.ticket(ticket.ticket_id).status == TicketStatus::Completed);

    std::map<std::pair<std::string, std::size_t>, int> grants;
    int replays = 0;
    for (const auto& ev : dup.log()) {
        if (ev.kind == LogEvent::Kind::AdmissionGranted) {
            grants[{ev.agent_id, ev.hop}] += 1;
        }
        if (ev.kind == LogEvent::Kind::AdmissionRejected && ev.detail == "Replay") {
            ++replays;
        }
        if (ev.kind == LogEvent::Kind::ExecuteDone) {
            CHECK(grants.count({ev.agent_id, ev.hop - 1}));
        }
    }
    for (const auto& [key, count] : grants) {
        (void)key;
        CHECK(count == 1); // exactly-once admission per (agent, hop)
    }
    CHECK(replays >= 1);

    // the duplicates change traffic but not the result content
    Doc clean_doc = *parse_doc(clean_bytes);
    Doc dup_doc = *parse_doc(render_structured(dup.report(ticket.ticket_id)));
    clean_doc.erase("traffic");
    dup_doc.erase("traffic");
    CHECK(clean_doc == dup_doc);
}

TEST_CASE("scope denial mid-route: hop recorded Denied, search continues") {
    Doc doc = s1_doc();
    for (auto& firm : doc["firms"]) {
        if (firm["id"] == "B") {
            firm["trust"].erase("A"); // B now grants A's agents Minimal only
        }
    }
    SimRuntime rt(ingest_scenario(doc), 17);
    QueryRequest q;
    q.is_trace = false;
    q.home = "A";
    q.visit = std::vector<FirmId>{"B", "D"};
    q.criteria.attribute_equals["commercial.price"] = "12.40"; // denied under Minimal
    QueryTicket ticket = rt.submit(q);
    rt.run();
    CHECK(rt.ticket(ticket.ticket_id).status == TicketStatus::Completed);
    const Report& report = rt.report(ticket.ticket_id);
    REQUIRE(report.hops.size() == 2); // B denied, D still visited
    CHECK(report.hops[0].firm == "B");
    CHECK(report.hops[0].outcome == HopOutcome::Denied);
    CHECK(report.hops[1].firm == "D");
    CHECK(report.hops[1].outcome == HopOutcome::Collected);
    // D trusts A as Known: commercial criteria match in store but cannot be
    // verified post-redaction, so nothing is carried home
    CHECK(report.sections.empty());
}

TEST_CASE("lost delivery confirmation: retransmission is replay-rejected and settles") {
    // C-D drops right after the transfer is delivered, swallowing the ACK,
    // and comes back much later. The walk continues from D regardless; the
    // retransmission is the only recovery traffic.
    Doc doc = with_link_schedule(s1_doc(), "C", "D",
                                 {{0, true}, {15, false}, {3000, true}});
    SimRuntime rt(ingest_scenario(doc), 18);
    QueryTicket ticket = rt.submit(trace_req("P-100", "C"));
    rt.run();
    CHECK(rt.ticket(ticket.ticket_id).status == TicketStatus::Completed);
    CHECK(*rt.report(ticket.ticket_id).chain == std::vector<FirmId>{"A", "B", "D"});

    bool control_lost = false;
    int replays = 0;
    int executions_at_d = 0;
    for (const auto& ev : rt.log()) {
        if (ev.kind == LogEvent::Kind::ControlLost) control_lost = true;
        if (ev.kind == LogEvent::Kind::AdmissionRejected && ev.detail == "Replay") ++replays;
        if (ev.kind == LogEvent::Kind::ExecuteDone && ev.firm == "D") ++executions_at_d;
    }
    CHECK(control_lost);
    CHECK(replays >= 1);
    CHECK(executions_at_d == 1); // retransmissions never re-execute

    // the launch leg eventually settles as departed at home
    auto entries = rt.registry("C");
    REQUIRE_FALSE(entries.empty());
    CHECK(entries.front().state == RegistryState::Departed);
}

TEST_CASE("behavior panic mid-route fails the ticket via an error result") {
    ScenarioData scenario = load_s1();
    SimRuntime rt(scenario, 11);
    // break the trace behavior at D only
    rt.platform("D").register_behavior(
        kBehaviorTrace,
        [](AgentCapsule, const FirmId&, const ScopedStoreAccess&, Millis) -> ExecuteResult {
            throw std::runtime_error("storage offline");
        });
    QueryTicket ticket = rt.submit(trace_req("P-100", "C"));
    rt.run();
    CHECK(rt.ticket(ticket.ticket_id).status == TicketStatus::Failed);
    CHECK(rt.ticket(ticket.ticket_id).failure_reason.find("storage offline") != std::string::npos);
    auto entries = rt.registry("D");
    REQUIRE_FALSE(entries.empty());
    CHECK(entries[0].state == RegistryState::Rejected);
}

TEST_CASE("link that never comes up makes the query undeliverable") {
    Doc doc = with_link_schedule(s1_doc(), "C", "D", {{0, false}});
    doc["horizon_ms"] = 60'000;
    SimRuntime rt(ingest_scenario(doc), 12);
    QueryTicket ticket = rt.submit(trace_req("P-100", "C"));
    rt.run();
    CHECK(rt.ticket(ticket.ticket_id).status == TicketStatus::Failed);
    bool saw_undeliverable = false;
    for (const auto& ev : rt.log()) {
        if (ev.kind == LogEvent::Kind::Undeliverable) saw_undeliverable = true;
    }
    CHECK(saw_undeliverable);
}

TEST_CASE("identical scenario and seed give byte-identical reports and logs") {
    auto run_once = [](std::uint64_t seed) {
        SimRuntime rt(load_s1(), seed);
        QueryTicket t1 = rt.submit(trace_req("P-100", "C"));
        QueryRequest q;
        q.is_trace = false;
        q.home = "B";
        q.criteria.supplier = "A";
        QueryTicket t2 = rt.submit(q);
        rt.run();
        std::string out = render_structured(rt.report(t1.ticket_id)) + "|" +
                          render_structured(rt.report(t2.ticket_id));
        out += "|" + std::to_string(rt.log().size());
        for (const auto& row : rt.traffic()) {
            out += "|" + row.a + row.b + ":" + std::to_string(row.a_to_b) + "/" +
                   std::to_string(row.b_to_a);
        }
        return out;
    };
    CHECK(run_once(42) == run_once(42));
    // a different seed changes agent ids, so reports differ
    CHECK(run_once(42) != run_once(43));
}

TEST_CASE("progress hook sees interim reports as hops complete") {
    SimRuntime rt(load_s1(), 13);
    std::vector<std::string> statuses;
    std::vector<std::size_t> hop_counts;
    rt.set_progress_hook([&](const Report& interim) {
        statuses.push_back(interim.status);
        hop_counts.push_back(interim.hops.size());
    });
    rt.submit(trace_req("P-100", "C"));
    rt.run();
    REQUIRE(hop_counts.size() == 3);
    CHECK(hop_counts == std::vector<std::size_t>{1, 2, 3});
    for (const auto& s : statuses) {
        CHECK(s == "InFlight");
    }
}

TEST_CASE("unknown product or home is rejected at submission") {
    SimRuntime rt(load_s1(), 14);
    CHECK_THROWS_AS(rt.submit(trace_req("P-999", "C")), Error);
    CHECK_THROWS_AS(rt.submit(trace_req("P-100", "Z")), Error);
    QueryRequest q;
    q.is_trace = false;
    q.home = "C";
    q.visit = std::vector<FirmId>{"B", "C"}; // home in the visit list
    CHECK_THROWS_AS(rt.submit(q), Error);
    q.visit = std::vector<FirmId>{"B", "B"}; // duplicate
    CHECK_THROWS_AS(rt.submit(q), Error);
    q.visit = std::vector<FirmId>{};
    CHECK_THROWS_AS(rt.submit(q), Error);
}

TEST_CASE("ttl too small for the chain returns partial results") {
    SimRuntime rt(load_s1(), 15);
    QueryTicket ticket = rt.submit(trace_req("P-100", "C", 2));
    rt.run();
    CHECK(rt.ticket(ticket.ticket_id).status == TicketStatus::Completed);
    const Report& report = rt.report(ticket.ticket_id);
    REQUIRE(report.chain);
    CHECK(*report.chain == std::vector<FirmId>{"B", "D"}); // ran out before A
    CHECK_FALSE(report.chain_complete);
    CHECK(report.hops.size() == 2);
}
