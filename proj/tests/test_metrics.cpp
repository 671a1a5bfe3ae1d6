#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "agentnet/generator.hpp"
#include "agentnet/metrics.hpp"
#include "helpers.hpp"

using namespace agentnet;
using namespace agentnet::testing;

namespace {

QueryRequest trace_req(const ProductId& product, const FirmId& home) {
    QueryRequest q;
    q.is_trace = true;
    q.product = product;
    q.home = home;
    q.ttl = 16;
    return q;
}

} // namespace

TEST_CASE("oracle trace is the chain itself") {
    ScenarioData s1 = load_s1();
    OracleResult oracle = centralized_oracle(s1, trace_req("P-100", "C"));
    CHECK(oracle.chain == std::vector<FirmId>{"A", "B", "D"});
    OracleResult single = centralized_oracle(s1, trace_req("P-300", "C"));
    CHECK(single.chain == std::vector<FirmId>{"D"});
}

TEST_CASE("oracle search equals brute force over target stores") {
    ScenarioData s1 = load_s1();
    QueryRequest q;
    q.is_trace = false;
    q.home = "C";
    q.criteria.supplier = "A";
    OracleResult oracle = centralized_oracle(s1, q, AccessScope::Full);
    // A-supplied records at B (P-100, P-101) and D (P-100, P-102)
    REQUIRE(oracle.records.size() == 4);
    CHECK(oracle.records[0].first == "B");
    CHECK(oracle.records[0].second.product == "P-100");
    CHECK(oracle.records[3].first == "D");
    CHECK(oracle.records[3].second.product == "P-102");
}

TEST_CASE("agent search equals the oracle at derived scopes on S1") {
    ScenarioData s1 = load_s1();
    QueryRequest q;
    q.is_trace = false;
    q.home = "C";
    q.criteria.category = "bearing";

    SimRuntime rt(s1, 21);
    QueryTicket ticket = rt.submit(q);
    rt.run();
    REQUIRE(rt.ticket(ticket.ticket_id).status == TicketStatus::Completed);
    CHECK(flatten_records(rt.report(ticket.ticket_id)) == centralized_oracle(s1, q).records);
}

TEST_CASE("baseline pulls full tables and filters at home") {
    ScenarioData s1 = load_s1();
    QueryRequest q;
    q.is_trace = false;
    q.home = "C";
    q.criteria.supplier = "A";
    BaselineRun baseline = baseline_fetch(s1, q);
    // it finds the same products the oracle does, without provenance
    OracleResult oracle = centralized_oracle(s1, q, AccessScope::Full);
    REQUIRE(baseline.records.size() == oracle.records.size());
    CHECK(baseline.total_bytes > 0);

    // trace baseline: full custody pull from every other firm rebuilds the chain
    BaselineRun trace_baseline = baseline_fetch(s1, trace_req("P-100", "C"));
    CHECK(trace_baseline.chain == std::vector<FirmId>{"A", "B", "D"});
}

TEST_CASE("zero-record firms cost the baseline only framing overhead") {
    Doc doc = s1_doc();
    doc["products"] = Doc::array();
    doc["custody"] = Doc::array();
    ScenarioData empty = ingest_scenario(doc);
    QueryRequest q;
    q.is_trace = false;
    q.home = "C";
    q.criteria.category = "bearing";
    BaselineRun baseline = baseline_fetch(empty, q);
    CHECK(baseline.records.empty());
    // per firm: request frame + response frame carrying an empty table
    std::uint64_t per_firm_overhead =
        (kFrameHeaderLen + kFrameTagLen) * 2 + std::string("{\"want\":\"products\"}").size() +
        std::string("{\"products\":[]}").size();
    CHECK(baseline.total_bytes == 3 * per_firm_overhead);
}

TEST_CASE("run_comparison on the bench scenario: ratio under 0.25") {
    ScenarioData bench = bench_scenario(2024);
    QueryRequest q = bench_query(bench);
    TrafficReport report = run_comparison(bench, q, 31);
    CHECK(report.agent_total > 0);
    CHECK(report.baseline_total > 0);
    CHECK(report.agent_total * 4 < report.baseline_total); // ratio < 0.25
    CHECK(report.hops == 4);
    // ratio is the reduced fraction of the totals
    CHECK(report.agent_total * report.ratio_den == report.baseline_total * report.ratio_num);

    // totals equal the per-link sums
    std::uint64_t agent_sum = 0;
    for (const auto& row : report.agent_per_link) agent_sum += row.both();
    CHECK(agent_sum == report.agent_total);
}

TEST_CASE("comparison report is deterministic for a fixed seed") {
    ScenarioData s1 = load_s1();
    QueryRequest q;
    q.is_trace = false;
    q.home = "C";
    q.criteria.supplier = "A";
    std::string a = canonical_encode(run_comparison(s1, q, 5).to_doc());
    std::string b = canonical_encode(run_comparison(s1, q, 5).to_doc());
    CHECK(a == b);
}

TEST_CASE("empty-result query: the agent ships a near-empty capsule") {
    ScenarioData bench = bench_scenario(11);
    QueryRequest q = bench_query(bench);
    q.criteria.category = "no-such-category";
    TrafficReport report = run_comparison(bench, q, 12);
    CHECK(report.agent_total > 0);
    // nothing matched anywhere, so the agent hauls only capsule framing
    CHECK(report.agent_total * 20 < report.baseline_total);
}

TEST_CASE("single-firm full-selectivity search can favor the baseline; reported, not asserted") {
    ScenarioData s1 = load_s1();
    QueryRequest q;
    q.is_trace = false;
    q.home = "A";
    q.visit = std::vector<FirmId>{"C"}; // C holds a single record
    TrafficReport report = run_comparison(s1, q, 32);
    // the agent hauls its capsule both ways for one record; no assertion on
    // direction here, only that the accounting is consistent
    CHECK(report.agent_total > 0);
    CHECK(report.baseline_total > 0);
}

TEST_CASE("intermittency run: scripted window, completion after first uplink") {
    Doc doc = s1_doc();
    for (auto& link : doc["links"]) {
        if ((link["a"] == "C" && link["b"] == "D") || (link["a"] == "D" && link["b"] == "C")) {
            link["schedule"] =
                Doc::array({Doc::object({{"from_ms", 0}, {"up", false}}),
                            Doc::object({{"from_ms", 5000}, {"up", true}})});
        }
    }
    ScenarioData scenario = ingest_scenario(doc);
    IntermittencyLog log = run_intermittency(scenario, trace_req("P-100", "C"), 33, false);
    CHECK(log.completed);
    CHECK(log.retries >= 6);
    CHECK(log.max_admissions_per_hop == 1);
    // done within one backoff step of the uplink instant plus path latency
    CHECK(log.completion_ms >= 5000);
    CHECK(log.completion_ms <= 5000 + 1600 + 200);
}

TEST_CASE("intermittency with duplicate injection: replay rejected, same report") {
    ScenarioData s1 = load_s1();
    IntermittencyLog clean = run_intermittency(s1, trace_req("P-100", "C"), 34, false);
    IntermittencyLog dup = run_intermittency(s1, trace_req("P-100", "C"), 34, true);
    CHECK(clean.replay_rejections == 0);
    CHECK(dup.replay_rejections >= 1);
    CHECK(dup.max_admissions_per_hop == 1);
    Doc clean_doc = clean.report.to_doc();
    Doc dup_doc = dup.report.to_doc();
    clean_doc.erase("traffic");
    dup_doc.erase("traffic");
    CHECK(clean_doc == dup_doc);
}

TEST_CASE("eventual delivery: random eventually-up schedules always complete") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        GenParams params;
        params.firms = 4 + int(rng() % 3);
        params.products = 8;
        params.max_chain = 4;
        params.trust = TrustPolicy::AtLeastKnown;
        ScenarioData sc = generate_scenario(params, 7000 + seed);
        // random down windows on every link, each schedule ending up
        for (auto& link : sc.links) {
            Millis t = 0;
            int flips = int(rng() % 4);
            for (int f = 0; f < flips; ++f) {
                t += 100 + Millis(rng() % 4000);
                link.schedule.push_back({t, f % 2 == 0 ? false : true});
            }
            t += 100 + Millis(rng() % 4000);
            link.schedule.push_back({t, true}); // up on an unbounded suffix
        }
        QueryRequest q = random_trace_query(sc, rng);
        IntermittencyLog log = run_intermittency(sc, q, seed, seed % 2 == 0);
        CHECK_MESSAGE(log.completed, "seed ", seed, ": ", log.failure);
        CHECK(log.max_admissions_per_hop == 1);
        CHECK(log.report.chain == centralized_oracle(sc, q).chain);
    }
}

TEST_CASE("generated scenarios are valid and self-consistent") {
    GenParams params;
    params.firms = 6;
    params.products = 30;
    params.max_chain = 5;
    params.trust = TrustPolicy::Mixed;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        ScenarioData sc = generate_scenario(params, seed);
        CHECK(sc.configs.size() == 6);
        CHECK(sc.catalog.size() == 30);
        for (const auto& [product, events] : sc.custody_by_product) {
            auto chain = build_custody_chain(events);
            CHECK(sc.directory.at(product) == chain.back().firm);
        }
        // the scenario document round-trips through ingestion
        ScenarioData again = ingest_scenario(scenario_to_doc(sc));
        CHECK(again.directory == sc.directory);
        CHECK(again.supplier_index == sc.supplier_index);
    }
}

TEST_CASE("generated queries are well-formed") {
    ScenarioData sc = generate_scenario(GenParams{}, 77);
    std::mt19937_64 rng(99);
    for (int i = 0; i < 20; ++i) {
        QueryRequest t = random_trace_query(sc, rng);
        CHECK(sc.directory.count(t.product) == 1);
        QueryRequest s = random_search_query(sc, rng);
        SearchGoal goal{s.criteria, s.visit};
        CHECK_FALSE(resolve_targets(goal, sc, s.home).empty());
    }
}

TEST_CASE("uniform trust override rewrites every relation") {
    ScenarioData sc = with_uniform_trust(load_s1(), TrustLevel::Unknown);
    for (const auto& [id, cfg] : sc.configs) {
        for (const auto& [peer, level] : cfg.trust) {
            (void)peer;
            CHECK(level == TrustLevel::Unknown);
        }
        CHECK(cfg.trust.size() == sc.configs.size() - 1);
        CHECK(assign_scope(id, cfg) == AccessScope::Full); // self stays Full
    }
}
