#include "agentnet/agent.hpp"

namespace agentnet {

const char* hop_outcome_name(HopOutcome o) {
    switch (o) {
    case HopOutcome::Collected: return "Collected";
    case HopOutcome::NotHeld: return "NotHeld";
    case HopOutcome::Denied: break;
    }
    return "Denied";
}

std::optional<HopOutcome> hop_outcome_from_name(std::string_view name) {
    if (name == "Collected") return HopOutcome::Collected;
    if (name == "NotHeld") return HopOutcome::NotHeld;
    if (name == "Denied") return HopOutcome::Denied;
    return std::nullopt;
}

namespace {

Doc goal_to_doc(const GoalSpec& goal) {
    Doc d = Doc::object();
    if (const auto* trace = std::get_if<TraceGoal>(&goal)) {
        d["trace"] = Doc::object({{"product", trace->product}});
    } else {
        const auto& search = std::get<SearchGoal>(goal);
        Doc s = Doc::object();
        s["criteria"] = search.criteria.to_doc();
        if (search.visit) {
            s["visit"] = *search.visit;
        }
        d["search"] = s;
    }
    return d;
}

GoalSpec goal_from_doc(const Doc& d) {
    if (!d.is_object() || d.size() != 1) {
        raise(Errc::CapsuleMalformed, "goal must set exactly one variant");
    }
    if (auto it = d.find("trace"); it != d.end()) {
        if (!it->is_object() || !it->contains("product") || !(*it)["product"].is_string()) {
            raise(Errc::CapsuleMalformed, "trace goal needs a product id");
        }
        return TraceGoal{(*it)["product"].get<std::string>()};
    }
    if (auto it = d.find("search"); it != d.end()) {
        if (!it->is_object() || !it->contains("criteria")) {
            raise(Errc::CapsuleMalformed, "search goal needs criteria");
        }
        SearchGoal g;
        g.criteria = QueryCriteria::from_doc((*it)["criteria"]);
        if (auto v = it->find("visit"); v != it->end() && !v->is_null()) {
            if (!v->is_array()) {
                raise(Errc::CapsuleMalformed, "visit must be a firm list");
            }
            std::vector<FirmId> visit;
            for (const auto& f : *v) {
                if (!f.is_string()) raise(Errc::CapsuleMalformed, "visit entries must be firm ids");
                visit.push_back(f.get<std::string>());
            }
            g.visit = std::move(visit);
        }
        return g;
    }
    raise(Errc::CapsuleMalformed, "goal must be trace or search");
}

Doc hop_to_doc(const HopEntry& h) {
    Doc d = Doc::object();
    d["firm"] = h.firm;
    d["arrived_at"] = h.arrived_at;
    d["scope_granted"] = scope_name(h.scope_granted);
    d["outcome"] = hop_outcome_name(h.outcome);
    return d;
}

HopEntry hop_from_doc(const Doc& d) {
    if (!d.is_object()) raise(Errc::CapsuleMalformed, "hop entry must be a map");
    HopEntry h;
    if (!d.contains("firm") || !d["firm"].is_string())
        raise(Errc::CapsuleMalformed, "hop entry needs a firm");
    h.firm = d["firm"].get<std::string>();
    if (!d.contains("arrived_at") || !d["arrived_at"].is_number_integer())
        raise(Errc::CapsuleMalformed, "hop entry needs arrived_at");
    h.arrived_at = d["arrived_at"].get<Millis>();
    auto scope = d.contains("scope_granted") && d["scope_granted"].is_string()
                     ? scope_from_name(d["scope_granted"].get<std::string>())
                     : std::nullopt;
    if (!scope) raise(Errc::CapsuleMalformed, "hop entry has an unknown scope");
    h.scope_granted = *scope;
    auto outcome = d.contains("outcome") && d["outcome"].is_string()
                       ? hop_outcome_from_name(d["outcome"].get<std::string>())
                       : std::nullopt;
    if (!outcome) raise(Errc::CapsuleMalformed, "hop entry has an unknown outcome");
    h.outcome = *outcome;
    return h;
}

Doc result_to_doc(const ResultItem& r) {
    Doc d = Doc::object();
    d["firm"] = r.firm;
    if (r.record) d["record"] = r.record->to_doc();
    if (r.custody) d["custody"] = r.custody->to_doc();
    return d;
}

ResultItem result_from_doc(const Doc& d) {
    if (!d.is_object() || !d.contains("firm") || !d["firm"].is_string()) {
        raise(Errc::CapsuleMalformed, "result item needs a collecting firm");
    }
    ResultItem r;
    r.firm = d["firm"].get<std::string>();
    bool has_record = d.contains("record");
    bool has_custody = d.contains("custody");
    if (has_record == has_custody) {
        raise(Errc::CapsuleMalformed, "result item must carry exactly one of record/custody");
    }
    if (has_record) {
        r.record = ProductRecord::from_doc(d["record"]);
    } else {
        r.custody = CustodyEvent::from_doc(d["custody"]);
    }
    return r;
}

} // namespace

Doc AgentCapsule::to_doc(bool include_signature) const {
    Doc d = Doc::object();
    d["agent_id"] = to_hex(agent_id);
    d["home"] = home;
    d["behavior"] = behavior;
    d["goal"] = goal_to_doc(goal);
    Doc itin = Doc::object();
    itin["planned"] = itinerary.planned;
    itin["position"] = static_cast<std::int64_t>(itinerary.position);
    itin["fixed"] = itinerary.fixed;
    d["itinerary"] = itin;
    Doc hops_doc = Doc::array();
    for (const auto& h : hops) hops_doc.push_back(hop_to_doc(h));
    d["hops"] = hops_doc;
    Doc results_doc = Doc::array();
    for (const auto& r : results) results_doc.push_back(result_to_doc(r));
    d["results"] = results_doc;
    d["ttl"] = ttl;
    if (include_signature) {
        d["signature"] = to_hex(signature);
    }
    return d;
}

AgentCapsule AgentCapsule::from_doc(const Doc& d) {
    if (!d.is_object()) {
        raise(Errc::CapsuleMalformed, "capsule must be a map");
    }
    static const char* required[] = {"agent_id", "home",    "behavior", "goal",
                                     "itinerary", "hops",    "results",  "ttl",
                                     "signature"};
    for (const char* key : required) {
        if (!d.contains(key)) {
            raise(Errc::CapsuleMalformed, std::string("capsule missing field '") + key + "'");
        }
    }
    for (auto it = d.begin(); it != d.end(); ++it) {
        bool known = false;
        for (const char* key : required) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            raise(Errc::CapsuleMalformed, "capsule has unknown field '" + it.key() + "'");
        }
    }

    AgentCapsule c;
    if (!d["agent_id"].is_string() || !from_hex(d["agent_id"].get<std::string>(), c.agent_id)) {
        raise(Errc::CapsuleMalformed, "agent_id must be 16 bytes hex");
    }
    if (!d["home"].is_string() || !valid_firm_id(d["home"].get<std::string>())) {
        raise(Errc::CapsuleMalformed, "home must be a firm id");
    }
    c.home = d["home"].get<std::string>();
    if (!d["behavior"].is_string()) {
        raise(Errc::CapsuleMalformed, "behavior must be a string");
    }
    c.behavior = d["behavior"].get<std::string>();
    c.goal = goal_from_doc(d["goal"]);

    const Doc& itin = d["itinerary"];
    if (!itin.is_object() || !itin.contains("planned") || !itin["planned"].is_array() ||
        !itin.contains("position") || !itin["position"].is_number_integer() ||
        !itin.contains("fixed") || !itin["fixed"].is_boolean()) {
        raise(Errc::CapsuleMalformed, "itinerary must carry planned/position/fixed");
    }
    for (const auto& f : itin["planned"]) {
        if (!f.is_string() || !valid_firm_id(f.get<std::string>())) {
            raise(Errc::CapsuleMalformed, "itinerary stop is not a firm id");
        }
        c.itinerary.planned.push_back(f.get<std::string>());
    }
    std::int64_t pos = itin["position"].get<std::int64_t>();
    if (pos < 0 || pos > static_cast<std::int64_t>(c.itinerary.planned.size())) {
        raise(Errc::CapsuleMalformed, "itinerary position out of range");
    }
    c.itinerary.position = static_cast<std::size_t>(pos);
    c.itinerary.fixed = itin["fixed"].get<bool>();

    if (!d["hops"].is_array() || !d["results"].is_array()) {
        raise(Errc::CapsuleMalformed, "hops and results must be arrays");
    }
    for (const auto& h : d["hops"]) c.hops.push_back(hop_from_doc(h));
    for (const auto& r : d["results"]) c.results.push_back(result_from_doc(r));

    if (!d["ttl"].is_number_integer()) {
        raise(Errc::CapsuleMalformed, "ttl must be an integer");
    }
    c.ttl = d["ttl"].get<std::int64_t>();
    if (c.ttl < 0) {
        raise(Errc::CapsuleMalformed, "ttl must be >= 0");
    }
    if (!d["signature"].is_string() || !from_hex(d["signature"].get<std::string>(), c.signature)) {
        raise(Errc::CapsuleMalformed, "signature must be 32 bytes hex");
    }
    return c;
}

std::string encode_capsule(const AgentCapsule& capsule) {
    return canonical_encode(capsule.to_doc(true));
}

AgentCapsule decode_capsule(std::string_view bytes) {
    auto doc = parse_doc(bytes);
    if (!doc) {
        raise(Errc::CapsuleMalformed, "capsule bytes are not a well-formed document");
    }
    return AgentCapsule::from_doc(*doc);
}

void sign_capsule(AgentCapsule& capsule, const Key32& key) {
    capsule.signature = hmac_sha256(key, canonical_encode(capsule.to_doc(false)));
}

bool verify_capsule_signature(const AgentCapsule& capsule, const Key32& key) {
    return hmac_sha256(key, canonical_encode(capsule.to_doc(false))) == capsule.signature;
}

bool verify_payload_signature(std::string_view payload, const Key32& key) {
    auto doc = parse_doc(payload);
    if (!doc || !doc->is_object()) {
        return false;
    }
    auto sig_field = doc->find("signature");
    if (sig_field == doc->end() || !sig_field->is_string()) {
        return false;
    }
    Digest32 claimed{};
    if (!from_hex(sig_field->get<std::string>(), claimed)) {
        return false;
    }
    Doc unsigned_doc = *doc;
    unsigned_doc.erase("signature");
    std::string body;
    try {
        body = canonical_encode(unsigned_doc);
    } catch (const Error&) {
        return false;
    }
    return hmac_sha256(key, body) == claimed;
}

AgentCapsule new_agent(const GoalSpec& goal, const FirmId& home, Itinerary itinerary,
                       std::int64_t ttl, const Key32& first_hop_key, const AgentId& agent_id) {
    if (ttl <= 0 || ttl > kMaxTtl) {
        raise(Errc::BadConfig, "ttl must be in (0, " + std::to_string(kMaxTtl) + "]");
    }
    if (itinerary.planned.empty()) {
        raise(Errc::BadConfig, "itinerary must name at least one stop");
    }
    if (itinerary.position != 0) {
        raise(Errc::BadConfig, "a fresh agent starts at itinerary position 0");
    }
    const bool is_trace = std::holds_alternative<TraceGoal>(goal);
    if (is_trace && (!itinerary.fixed || itinerary.planned.size() != 1)) {
        raise(Errc::BadConfig, "trace itineraries are fixed and start with a single stop");
    }
    if (!is_trace && itinerary.fixed) {
        raise(Errc::BadConfig, "search itineraries are planned, not fixed");
    }

    AgentCapsule c;
    c.agent_id = agent_id;
    c.home = home;
    c.behavior = is_trace ? kBehaviorTrace : kBehaviorSearch;
    c.goal = goal;
    c.itinerary = std::move(itinerary);
    c.ttl = ttl;
    sign_capsule(c, first_hop_key);
    return c;
}

namespace {

ExecuteResult run_trace(AgentCapsule c, const FirmId& firm, const ScopedStoreAccess& access,
                        Millis now) {
    const auto& goal = std::get<TraceGoal>(c.goal);
    HopEntry hop{firm, now, access.scope(), HopOutcome::Collected};
    std::optional<FirmId> predecessor;
    try {
        CustodyLookup lookup = access.custody(goal.product);
        for (const auto& e : lookup.events) {
            c.results.push_back(ResultItem{firm, std::nullopt, e});
        }
        predecessor = lookup.predecessor;
    } catch (const Error& e) {
        hop.outcome = e.code() == Errc::NotHeld ? HopOutcome::NotHeld : HopOutcome::Denied;
    }
    c.hops.push_back(hop);
    c.itinerary.position += 1;
    c.ttl -= 1;
    if (hop.outcome == HopOutcome::Collected && predecessor && c.ttl > 0) {
        c.itinerary.planned.push_back(*predecessor);
        return {std::move(c), NextMigrate{*predecessor}};
    }
    return {std::move(c), NextReturnHome{}};
}

ExecuteResult run_search(AgentCapsule c, const FirmId& firm, const ScopedStoreAccess& access,
                         Millis now) {
    const auto& goal = std::get<SearchGoal>(c.goal);
    HopEntry hop{firm, now, access.scope(), HopOutcome::Collected};
    try {
        std::vector<ProductRecord> records = access.query(goal.criteria);
        for (auto& r : local_filter(records, goal.criteria)) {
            c.results.push_back(ResultItem{firm, std::move(r), std::nullopt});
        }
    } catch (const Error&) {
        hop.outcome = HopOutcome::Denied;
    }
    c.hops.push_back(hop);
    c.itinerary.position += 1;
    c.ttl -= 1;
    if (!c.itinerary.exhausted() && c.ttl > 0) {
        FirmId next = c.itinerary.planned[c.itinerary.position];
        return {std::move(c), NextMigrate{std::move(next)}};
    }
    return {std::move(c), NextReturnHome{}};
}

} // namespace

ExecuteResult execute_at(AgentCapsule capsule, const FirmId& firm, const ScopedStoreAccess& access,
                         Millis now) {
    if (capsule.itinerary.exhausted() || capsule.itinerary.planned[capsule.itinerary.position] != firm) {
        raise(Errc::BadConfig, "agent executed at " + firm + " which is not its next planned stop");
    }
    if (capsule.ttl <= 0) {
        raise(Errc::BadConfig, "agent has no hop budget left");
    }
    if (capsule.behavior == kBehaviorTrace) {
        return run_trace(std::move(capsule), firm, access, now);
    }
    if (capsule.behavior == kBehaviorSearch) {
        return run_search(std::move(capsule), firm, access, now);
    }
    raise(Errc::BadConfig, "no built-in behavior '" + capsule.behavior + "'");
}

std::vector<ProductRecord> local_filter(const std::vector<ProductRecord>& records,
                                        const QueryCriteria& criteria) {
    std::vector<ProductRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (matches(r, criteria)) {
            out.push_back(r);
        }
    }
    return out;
}

} // namespace agentnet
