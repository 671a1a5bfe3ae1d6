#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "agentnet/agent.hpp"
#include "helpers.hpp"

using namespace agentnet;
using namespace agentnet::testing;

namespace {

AgentCapsule fresh_trace(const ScenarioData& s1, const ProductId& product, const FirmId& home,
                         std::int64_t ttl = 16) {
    FirmId start = s1.directory.at(product);
    return new_agent(TraceGoal{product}, home, Itinerary{{start}, 0, true}, ttl,
                     s1.configs.at(home).keys.at(start), agent_id_from(1));
}

// Random capsule for round-trip property tests.
AgentCapsule random_capsule(std::mt19937_64& rng) {
    AgentCapsule c;
    for (auto& b : c.agent_id) b = std::uint8_t(rng());
    c.home = "C";
    bool trace = rng() % 2 == 0;
    c.behavior = trace ? kBehaviorTrace : kBehaviorSearch;
    if (trace) {
        c.goal = TraceGoal{"P-" + std::to_string(rng() % 1000)};
    } else {
        SearchGoal g;
        if (rng() % 2) g.criteria.category = "bearing";
        if (rng() % 2) g.criteria.supplier = "A";
        if (rng() % 3 == 0) g.criteria.attribute_equals["material"] = "steel";
        if (rng() % 3 == 0) g.visit = std::vector<FirmId>{"B", "D"};
        c.goal = g;
    }
    std::size_t stops = 1 + rng() % 4;
    const char* firms[] = {"A", "B", "D", "E"};
    for (std::size_t i = 0; i < stops; ++i) c.itinerary.planned.push_back(firms[i]);
    c.itinerary.fixed = trace;
    std::size_t hops = rng() % (stops + 1);
    c.itinerary.position = hops;
    for (std::size_t i = 0; i < hops; ++i) {
        c.hops.push_back(HopEntry{c.itinerary.planned[i], Millis(10 * i),
                                  static_cast<AccessScope>(rng() % 3),
                                  static_cast<HopOutcome>(rng() % 3)});
    }
    std::size_t results = rng() % 41; // up to 40 carried records
    for (std::size_t i = 0; i < results; ++i) {
        ResultItem item;
        item.firm = firms[rng() % 4];
        if (rng() % 2) {
            ProductRecord r;
            r.product = "P-" + std::to_string(rng() % 100);
            r.category = "bearing";
            if (rng() % 2) r.supplier = "A";
            if (rng() % 2) r.manufacture_date = Millis(rng() % 1000000);
            if (rng() % 2) r.attributes["material"] = "steel";
            item.record = r;
        } else {
            CustodyEvent e;
            e.product = "P-" + std::to_string(rng() % 100);
            e.firm = item.firm;
            if (rng() % 2) e.received_from = "A";
            e.received_at = Millis(rng() % 100000);
            item.custody = e;
        }
        c.results.push_back(item);
    }
    c.ttl = 1 + std::int64_t(rng() % 64);
    Key32 key{};
    for (auto& b : key) b = std::uint8_t(rng());
    sign_capsule(c, key);
    return c;
}

} // namespace

TEST_CASE("new_agent: trace configuration from the S1 directory") {
    ScenarioData s1 = load_s1();
    AgentCapsule c = fresh_trace(s1, "P-100", "C");
    CHECK(c.itinerary.planned == std::vector<FirmId>{"D"});
    CHECK(c.itinerary.fixed);
    CHECK(c.behavior == kBehaviorTrace);
    CHECK(c.hops.empty());
    CHECK(c.results.empty());
    CHECK(verify_capsule_signature(c, s1.configs.at("C").keys.at("D")));
}

TEST_CASE("new_agent: explicit visit list keeps the user's order") {
    ScenarioData s1 = load_s1();
    SearchGoal goal{QueryCriteria{}, std::vector<FirmId>{"B", "D"}};
    AgentCapsule c = new_agent(goal, "C", Itinerary{{"B", "D"}, 0, false}, 8,
                               s1.configs.at("C").keys.at("B"), agent_id_from(2));
    CHECK(c.itinerary.planned == std::vector<FirmId>{"B", "D"});
    CHECK_FALSE(c.itinerary.fixed);
    CHECK(c.behavior == kBehaviorSearch);
}

TEST_CASE("new_agent: configuration errors") {
    ScenarioData s1 = load_s1();
    Key32 key = s1.configs.at("C").keys.at("D");
    SUBCASE("ttl zero") {
        CHECK_THROWS_AS(new_agent(TraceGoal{"P-100"}, "C", Itinerary{{"D"}, 0, true}, 0, key,
                                  agent_id_from(3)),
                        Error);
    }
    SUBCASE("ttl above cap") {
        CHECK_THROWS_AS(new_agent(TraceGoal{"P-100"}, "C", Itinerary{{"D"}, 0, true}, 65, key,
                                  agent_id_from(3)),
                        Error);
    }
    SUBCASE("trace itinerary must be fixed") {
        CHECK_THROWS_AS(new_agent(TraceGoal{"P-100"}, "C", Itinerary{{"D"}, 0, false}, 8, key,
                                  agent_id_from(3)),
                        Error);
    }
    SUBCASE("search itinerary must not be fixed") {
        CHECK_THROWS_AS(new_agent(SearchGoal{}, "C", Itinerary{{"B", "D"}, 0, true}, 8, key,
                                  agent_id_from(3)),
                        Error);
    }
}

TEST_CASE("trace execution walks the chain backwards") {
    ScenarioData s1 = load_s1();
    AgentCapsule c = fresh_trace(s1, "P-100", "C");

    ScopedStoreAccess at_d(s1.stores.at("D"), AccessScope::Full);
    auto [after_d, next_d] = execute_at(c, "D", at_d, 20);
    CHECK(std::get<NextMigrate>(next_d).dest == "B");
    REQUIRE(after_d.results.size() == 1);
    CHECK(after_d.results[0].custody->firm == "D");
    CHECK(after_d.itinerary.planned == std::vector<FirmId>{"D", "B"});
    CHECK(after_d.ttl == 15);
    REQUIRE(after_d.hops.size() == 1);
    CHECK(after_d.hops[0].outcome == HopOutcome::Collected);

    ScopedStoreAccess at_b(s1.stores.at("B"), AccessScope::Full);
    auto [after_b, next_b] = execute_at(after_d, "B", at_b, 24);
    CHECK(std::get<NextMigrate>(next_b).dest == "A");

    ScopedStoreAccess at_a(s1.stores.at("A"), AccessScope::Standard);
    auto [after_a, next_a] = execute_at(after_b, "A", at_a, 54);
    CHECK(std::holds_alternative<NextReturnHome>(next_a)); // origin: no predecessor
    CHECK(after_a.results.size() == 3);
    // visiting order is the reverse of the origin-first chain
    std::vector<FirmId> visited;
    for (const auto& h : after_a.hops) visited.push_back(h.firm);
    CHECK(visited == std::vector<FirmId>{"D", "B", "A"});
}

TEST_CASE("trace with ttl equal to one returns home after the first hop") {
    ScenarioData s1 = load_s1();
    AgentCapsule c = fresh_trace(s1, "P-100", "C", 1);
    ScopedStoreAccess at_d(s1.stores.at("D"), AccessScope::Full);
    auto [after, next] = execute_at(c, "D", at_d, 20);
    CHECK(std::holds_alternative<NextReturnHome>(next)); // predecessor exists but budget is gone
    CHECK(after.ttl == 0);
    CHECK(after.results.size() == 1);
}

TEST_CASE("trace denied under Minimal scope records the denial and returns") {
    ScenarioData s1 = load_s1();
    AgentCapsule c = fresh_trace(s1, "P-100", "C");
    ScopedStoreAccess at_d(s1.stores.at("D"), AccessScope::Minimal);
    auto [after, next] = execute_at(c, "D", at_d, 20);
    CHECK(std::holds_alternative<NextReturnHome>(next));
    CHECK(after.results.empty());
    REQUIRE(after.hops.size() == 1);
    CHECK(after.hops[0].outcome == HopOutcome::Denied);
}

TEST_CASE("trace at a firm that never held the product") {
    ScenarioData s1 = load_s1();
    AgentCapsule c = new_agent(TraceGoal{"P-200"}, "A", Itinerary{{"B"}, 0, true}, 8,
                               s1.configs.at("A").keys.at("B"), agent_id_from(4));
    ScopedStoreAccess at_b(s1.stores.at("B"), AccessScope::Full);
    auto [after, next] = execute_at(c, "B", at_b, 5);
    CHECK(std::holds_alternative<NextReturnHome>(next));
    REQUIRE(after.hops.size() == 1);
    CHECK(after.hops[0].outcome == HopOutcome::NotHeld);
}

TEST_CASE("search advances the itinerary and returns home at its end") {
    ScenarioData s1 = load_s1();
    QueryCriteria criteria;
    criteria.category = "bearing";
    SearchGoal goal{criteria, std::nullopt};
    AgentCapsule c = new_agent(goal, "C", Itinerary{{"B", "D"}, 0, false}, 8,
                               s1.configs.at("C").keys.at("B"), agent_id_from(5));

    ScopedStoreAccess at_b(s1.stores.at("B"), AccessScope::Full);
    auto [after_b, next_b] = execute_at(c, "B", at_b, 5);
    CHECK(std::get<NextMigrate>(next_b).dest == "D");
    CHECK(after_b.results.size() == 3); // P-100, P-101, P-201 are bearings at B

    ScopedStoreAccess at_d(s1.stores.at("D"), AccessScope::Full);
    auto [after_d, next_d] = execute_at(after_b, "D", at_d, 9);
    CHECK(std::holds_alternative<NextReturnHome>(next_d)); // itinerary exhausted
    CHECK(after_d.results.size() > after_b.results.size());
}

TEST_CASE("results only ever grow and ttl strictly decreases") {
    ScenarioData s1 = load_s1();
    QueryCriteria criteria;
    SearchGoal goal{criteria, std::nullopt};
    AgentCapsule c = new_agent(goal, "C", Itinerary{{"A", "B", "D"}, 0, false}, 8,
                               s1.configs.at("C").keys.at("A"), agent_id_from(6));
    FirmId stops[] = {"A", "B", "D"};
    std::size_t prev_results = 0;
    std::int64_t prev_ttl = c.ttl;
    for (const auto& stop : stops) {
        ScopedStoreAccess access(s1.stores.at(stop), AccessScope::Standard);
        auto [next_c, action] = execute_at(std::move(c), stop, access, 0);
        c = std::move(next_c);
        CHECK(c.results.size() >= prev_results);
        CHECK(c.ttl == prev_ttl - 1);
        prev_results = c.results.size();
        prev_ttl = c.ttl;
        (void)action;
    }
    CHECK(c.hops.size() == 3);
}

TEST_CASE("execute_at enforces the planned stop") {
    ScenarioData s1 = load_s1();
    AgentCapsule c = fresh_trace(s1, "P-100", "C");
    ScopedStoreAccess at_b(s1.stores.at("B"), AccessScope::Full);
    CHECK_THROWS_AS(execute_at(c, "B", at_b, 0), Error); // planned stop is D
}

TEST_CASE("local_filter is idempotent and contractive") {
    ScenarioData s1 = load_s1();
    QueryCriteria c;
    c.category = "bearing";
    auto all = query_products(s1.stores.at("B"), QueryCriteria{}, AccessScope::Full);
    auto once = local_filter(all, c);
    auto twice = local_filter(once, c);
    CHECK(once == twice);
    CHECK(once.size() <= all.size());
    CHECK(local_filter({}, c).empty());
    // records already matching pass through unchanged
    auto matching = query_products(s1.stores.at("B"), c, AccessScope::Full);
    CHECK(local_filter(matching, c) == matching);
}

TEST_CASE("local_filter drops records whose criterion fields were redacted away") {
    ScenarioData s1 = load_s1();
    QueryCriteria c;
    c.supplier = "A";
    // Minimal redaction hides the supplier: the store may return a superset.
    auto redacted = query_products(s1.stores.at("B"), c, AccessScope::Minimal);
    CHECK_FALSE(redacted.empty());
    CHECK(local_filter(redacted, c).empty());

    // category survives Minimal redaction, so category criteria still verify
    QueryCriteria cat;
    cat.category = "bearing";
    auto cat_redacted = query_products(s1.stores.at("B"), cat, AccessScope::Minimal);
    CHECK(local_filter(cat_redacted, cat) == cat_redacted);
}

TEST_CASE("capsule encode/decode round-trip") {
    ScenarioData s1 = load_s1();
    AgentCapsule fresh = fresh_trace(s1, "P-100", "C");
    CHECK(decode_capsule(encode_capsule(fresh)) == fresh);

    std::mt19937_64 rng(20240812);
    for (int i = 0; i < 300; ++i) {
        AgentCapsule c = random_capsule(rng);
        std::string bytes = encode_capsule(c);
        AgentCapsule back = decode_capsule(bytes);
        CHECK(back == c);
        CHECK(encode_capsule(back) == bytes);
    }
}

TEST_CASE("capsule decode failures") {
    ScenarioData s1 = load_s1();
    AgentCapsule c = fresh_trace(s1, "P-100", "C");
    std::string bytes = encode_capsule(c);

    CHECK_THROWS_AS(decode_capsule(bytes.substr(0, bytes.size() / 2)), Error); // truncated
    CHECK_THROWS_AS(decode_capsule("not json"), Error);

    Doc missing = c.to_doc(true);
    missing.erase("ttl");
    CHECK_THROWS_AS(AgentCapsule::from_doc(missing), Error);

    Doc extra = c.to_doc(true);
    extra["smuggled"] = 1;
    CHECK_THROWS_AS(AgentCapsule::from_doc(extra), Error);

    Doc bad_goal = c.to_doc(true);
    bad_goal["goal"] = Doc::object();
    CHECK_THROWS_AS(AgentCapsule::from_doc(bad_goal), Error);
}

TEST_CASE("any mutation of the signed region invalidates the signature") {
    ScenarioData s1 = load_s1();
    Key32 key = s1.configs.at("C").keys.at("D");
    AgentCapsule c = fresh_trace(s1, "P-100", "C");
    REQUIRE(verify_capsule_signature(c, key));
    std::string payload = encode_capsule(c);
    REQUIRE(verify_payload_signature(payload, key));

    // The signed region is everything but the signature field's hex value
    // (a case-flip there decodes to the same 32 bytes, which is not a
    // mutation of what was signed).
    std::size_t sig_at = payload.find("\"signature\":\"") + 13;
    std::mt19937_64 rng(99);
    int mutations = 0;
    for (int i = 0; i < 200 && mutations < 60; ++i) {
        std::string mutated = payload;
        std::size_t at = rng() % mutated.size();
        if (at >= sig_at && at < sig_at + 64) {
            continue;
        }
        char flip = char(mutated[at] ^ (1 << (rng() % 7)));
        if (flip == mutated[at] || flip == '"' || flip == '\\' || mutated[at] == '"' ||
            mutated[at] == '\\') {
            continue; // keep the document parseable so the signature path is what fails
        }
        mutated[at] = flip;
        ++mutations;
        CHECK_FALSE(verify_payload_signature(mutated, key));
    }
    CHECK(mutations >= 40);

    // wrong key fails too
    Key32 other{};
    CHECK_FALSE(verify_payload_signature(payload, other));
}
