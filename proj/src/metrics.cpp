#include "agentnet/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace agentnet {

AccessScope scope_granted_at(const ScenarioData& scenario, const FirmId& firm, const FirmId& home) {
    return assign_scope(home, scenario.configs.at(firm));
}

OracleResult centralized_oracle(const ScenarioData& scenario, const QueryRequest& query,
                                std::optional<AccessScope> scope_override) {
    OracleResult out;
    if (query.is_trace) {
        auto events = scenario.custody_by_product.find(query.product);
        if (events == scenario.custody_by_product.end()) {
            raise(Errc::BadRequest, "unknown product " + query.product);
        }
        out.chain_events = build_custody_chain(events->second);
        for (const auto& e : out.chain_events) {
            out.chain.push_back(e.firm);
        }
        return out;
    }

    SearchGoal goal{query.criteria, query.visit};
    std::set<FirmId> targets = resolve_targets(goal, scenario, query.home);
    for (const auto& firm : targets) {
        AccessScope scope =
            scope_override ? *scope_override : scope_granted_at(scenario, firm, query.home);
        if (scope == AccessScope::Minimal && query.criteria.references_commercial()) {
            continue; // the resource agent denies the query outright
        }
        const FirmStore& store = scenario.stores.at(firm);
        for (const auto& [id, record] : store.products) {
            (void)id;
            if (!matches(record, query.criteria)) {
                continue;
            }
            ProductRecord redacted = apply_scope(record, scope);
            // Same post-redaction re-check the agent applies on board.
            if (matches(redacted, query.criteria)) {
                out.records.emplace_back(firm, std::move(redacted));
            }
        }
    }
    std::sort(out.records.begin(), out.records.end(),
              [](const auto& x, const auto& y) {
                  return std::tie(x.first, x.second.product) < std::tie(y.first, y.second.product);
              });
    return out;
}

std::vector<std::pair<FirmId, ProductRecord>> flatten_records(const Report& report) {
    std::vector<std::pair<FirmId, ProductRecord>> out;
    for (const auto& section : report.sections) {
        for (const auto& record : section.records) {
            out.emplace_back(section.firm, record);
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return std::tie(x.first, x.second.product) < std::tie(y.first, y.second.product);
    });
    return out;
}

namespace {

// One request/response exchange with retry-on-down in both directions.
// Advances the clock past down windows the same way a live dispatcher
// would: probe, back off, probe again.
Millis exchange(SimLink& link, const FirmId& client, const FirmId& server,
                const std::string& request_frame, const std::string& response_frame,
                const PlatformConfig& client_cfg, const PlatformConfig& server_cfg, Millis start,
                Millis horizon) {
    VirtualClock clock{start};
    std::size_t attempt = 0;
    while (true) {
        SendOutcome outcome = link_send(link, client, request_frame, clock);
        if (const auto* delivered = std::get_if<Delivered>(&outcome)) {
            clock.now_ms = delivered->at_ms;
            break;
        }
        clock.now_ms += client_cfg.backoff_at(attempt++);
        if (clock.now_ms > horizon) {
            raise(Errc::Undeliverable, "baseline request to " + server + " not deliverable");
        }
    }
    attempt = 0;
    while (true) {
        SendOutcome outcome = link_send(link, server, response_frame, clock);
        if (const auto* delivered = std::get_if<Delivered>(&outcome)) {
            return delivered->at_ms;
        }
        clock.now_ms += server_cfg.backoff_at(attempt++);
        if (clock.now_ms > horizon) {
            raise(Errc::Undeliverable, "baseline response from " + server + " not deliverable");
        }
    }
}

} // namespace

BaselineRun baseline_fetch(const ScenarioData& scenario, const QueryRequest& query) {
    BaselineRun run;
    SimNetwork network(scenario.links);
    network.reset_counters();

    std::set<FirmId> targets;
    if (query.is_trace) {
        if (scenario.directory.find(query.product) == scenario.directory.end()) {
            raise(Errc::BadRequest, "unknown product " + query.product);
        }
        // Holder and chain unknown a priori: pull every other firm's log.
        for (const auto& id : scenario.firm_ids()) {
            if (id != query.home) {
                targets.insert(id);
            }
        }
    } else {
        query.criteria.validate();
        SearchGoal goal{query.criteria, query.visit};
        targets = resolve_targets(goal, scenario, query.home);
    }

    const PlatformConfig& home_cfg = scenario.configs.at(query.home);
    Millis now = 0;
    std::vector<ProductRecord> fetched_records;
    std::vector<CustodyEvent> fetched_events;

    for (const auto& target : targets) {
        SimLink* link = network.find_link(query.home, target);
        auto key = home_cfg.keys.find(target);
        if (!link || key == home_cfg.keys.end()) {
            raise(Errc::Undeliverable, "baseline has no route to " + target);
        }

        Doc request = Doc::object();
        request["want"] = query.is_trace ? "custody" : "products";
        std::string request_frame = encode_frame(MsgType::Hello, canonical_encode(request), key->second);

        const FirmStore& store = scenario.stores.at(target);
        Doc response = Doc::object();
        if (query.is_trace) {
            Doc events = Doc::array();
            for (const auto& e : store.custody) {
                events.push_back(e.to_doc());
            }
            response["custody"] = events;
        } else {
            Doc records = Doc::array();
            for (const auto& [id, record] : store.products) {
                (void)id;
                records.push_back(record.to_doc());
            }
            response["products"] = records;
        }
        std::string response_frame =
            encode_frame(MsgType::Result, canonical_encode(response), key->second);

        now = exchange(*link, query.home, target, request_frame, response_frame, home_cfg,
                       scenario.configs.at(target), now, scenario.horizon_ms);

        if (query.is_trace) {
            for (const auto& e : store.custody) {
                if (e.product == query.product) {
                    fetched_events.push_back(e);
                }
            }
        } else {
            for (const auto& [id, record] : store.products) {
                (void)id;
                fetched_records.push_back(record);
            }
        }
    }

    if (query.is_trace) {
        // The home firm's own events complete the picture locally.
        for (const auto& e : scenario.stores.at(query.home).custody) {
            if (e.product == query.product) {
                fetched_events.push_back(e);
            }
        }
        for (const auto& e : build_custody_chain(fetched_events)) {
            run.chain.push_back(e.firm);
        }
    } else {
        for (auto& record : fetched_records) {
            if (matches(record, query.criteria)) {
                // collecting firm is not tracked in the pull model
                run.records.emplace_back("", std::move(record));
            }
        }
        std::sort(run.records.begin(), run.records.end(), [](const auto& x, const auto& y) {
            return x.second.product < y.second.product;
        });
    }

    run.traffic = snapshot_traffic(network);
    run.traffic.erase(std::remove_if(run.traffic.begin(), run.traffic.end(),
                                     [](const LinkTraffic& t) { return t.both() == 0; }),
                      run.traffic.end());
    run.total_bytes = traffic_total(run.traffic);
    run.completion_ms = now;
    return run;
}

Doc TrafficReport::to_doc() const {
    auto link_rows = [](const std::vector<LinkTraffic>& rows) {
        Doc out = Doc::array();
        for (const auto& row : rows) {
            Doc l = Doc::object();
            l["a"] = row.a;
            l["b"] = row.b;
            l["a_to_b"] = row.a_to_b;
            l["b_to_a"] = row.b_to_a;
            out.push_back(l);
        }
        return out;
    };
    Doc d = Doc::object();
    d["query"] = query_echo;
    Doc agent = Doc::object();
    agent["total"] = agent_total;
    agent["per_link"] = link_rows(agent_per_link);
    d["agent"] = agent;
    Doc baseline = Doc::object();
    baseline["total"] = baseline_total;
    baseline["per_link"] = link_rows(baseline_per_link);
    d["baseline"] = baseline;
    Doc ratio = Doc::object();
    ratio["num"] = ratio_num;
    ratio["den"] = ratio_den;
    d["ratio"] = ratio;
    d["hops"] = static_cast<std::int64_t>(hops);
    return d;
}

TrafficReport run_comparison(const ScenarioData& scenario, const QueryRequest& query,
                             std::uint64_t seed) {
    TrafficReport report;
    report.query_echo = query.to_doc();

    SimRuntime runtime(scenario, seed);
    QueryTicket ticket = runtime.submit(query);
    runtime.run();
    const Report& agent_report = runtime.report(ticket.ticket_id);
    if (agent_report.status != "Completed") {
        raise(Errc::Undeliverable, "agent run failed: " + agent_report.failure_reason);
    }
    report.agent_per_link = agent_report.traffic;
    report.agent_total = agent_report.traffic_total_bytes;
    report.hops = agent_report.hops.size();

    BaselineRun baseline = baseline_fetch(scenario, query);
    report.baseline_per_link = baseline.traffic;
    report.baseline_total = baseline.total_bytes;

    std::uint64_t g = std::gcd(report.agent_total, report.baseline_total);
    report.ratio_num = g ? report.agent_total / g : report.agent_total;
    report.ratio_den = g ? report.baseline_total / g : report.baseline_total;
    return report;
}

IntermittencyLog run_intermittency(const ScenarioData& scenario, const QueryRequest& query,
                                   std::uint64_t seed, bool inject_duplicates) {
    IntermittencyLog out;
    SimRuntime runtime(scenario, seed);
    runtime.set_duplicate_transfers(inject_duplicates);
    QueryTicket ticket = runtime.submit(query);
    runtime.run();

    out.report = runtime.report(ticket.ticket_id);
    out.completed = runtime.ticket(ticket.ticket_id).status == TicketStatus::Completed;
    out.failure = runtime.ticket(ticket.ticket_id).failure_reason;
    out.log = runtime.log();

    std::map<std::pair<std::string, std::size_t>, int> granted;
    for (const auto& ev : out.log) {
        switch (ev.kind) {
        case LogEvent::Kind::RetryScheduled:
            out.retries += 1;
            break;
        case LogEvent::Kind::AdmissionRejected:
            if (ev.detail == "Replay") {
                out.replay_rejections += 1;
            }
            break;
        case LogEvent::Kind::AdmissionGranted:
            granted[{ev.agent_id, ev.hop}] += 1;
            break;
        case LogEvent::Kind::TicketCompleted:
            out.completion_ms = ev.t;
            break;
        default:
            break;
        }
    }
    for (const auto& [key, count] : granted) {
        (void)key;
        out.max_admissions_per_hop = std::max(out.max_admissions_per_hop, count);
    }
    return out;
}

} // namespace agentnet
