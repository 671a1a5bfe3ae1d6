#include "agentnet/runtime.hpp"

#include <algorithm>

namespace agentnet {

const char* log_kind_name(LogEvent::Kind k) {
    switch (k) {
    case LogEvent::Kind::LaunchGranted: return "LaunchGranted";
    case LogEvent::Kind::FrameSent: return "FrameSent";
    case LogEvent::Kind::SendDown: return "SendDown";
    case LogEvent::Kind::RetryScheduled: return "RetryScheduled";
    case LogEvent::Kind::FrameDelivered: return "FrameDelivered";
    case LogEvent::Kind::AdmissionGranted: return "AdmissionGranted";
    case LogEvent::Kind::AdmissionRejected: return "AdmissionRejected";
    case LogEvent::Kind::ExecuteDone: return "ExecuteDone";
    case LogEvent::Kind::ResultHome: return "ResultHome";
    case LogEvent::Kind::ControlReceived: return "ControlReceived";
    case LogEvent::Kind::ControlLost: return "ControlLost";
    case LogEvent::Kind::TicketCompleted: return "TicketCompleted";
    case LogEvent::Kind::TicketFailed: return "TicketFailed";
    case LogEvent::Kind::Undeliverable: return "Undeliverable";
    case LogEvent::Kind::ErrorNotice: break;
    }
    return "ErrorNotice";
}

Doc QueryRequest::to_doc() const {
    Doc d = Doc::object();
    d["kind"] = is_trace ? "trace" : "search";
    d["home"] = home;
    d["ttl"] = ttl;
    if (is_trace) {
        d["product"] = product;
    } else {
        d["criteria"] = criteria.to_doc();
        if (visit) d["visit"] = *visit;
    }
    return d;
}

QueryRequest QueryRequest::from_doc(const Doc& d) {
    if (!d.is_object() || !d.contains("kind") || !d["kind"].is_string()) {
        raise(Errc::BadRequest, "query must carry kind trace|search");
    }
    QueryRequest q;
    std::string kind = d["kind"].get<std::string>();
    if (kind == "trace") {
        q.is_trace = true;
        if (!d.contains("product") || !d["product"].is_string()) {
            raise(Errc::BadRequest, "trace query needs a product id");
        }
        q.product = d["product"].get<std::string>();
    } else if (kind == "search") {
        q.is_trace = false;
        if (d.contains("criteria")) {
            try {
                q.criteria = QueryCriteria::from_doc(d["criteria"]);
            } catch (const Error& e) {
                raise(Errc::BadRequest, e.what());
            }
        }
        if (d.contains("visit") && !d["visit"].is_null()) {
            if (!d["visit"].is_array()) raise(Errc::BadRequest, "visit must be a firm list");
            std::vector<FirmId> visit;
            for (const auto& f : d["visit"]) {
                if (!f.is_string()) raise(Errc::BadRequest, "visit entries must be firm ids");
                visit.push_back(f.get<std::string>());
            }
            q.visit = std::move(visit);
        }
    } else {
        raise(Errc::BadRequest, "unknown query kind '" + kind + "'");
    }
    if (!d.contains("home") || !d["home"].is_string()) {
        raise(Errc::BadRequest, "query needs a home firm");
    }
    q.home = d["home"].get<std::string>();
    if (d.contains("ttl")) {
        if (!d["ttl"].is_number_integer()) raise(Errc::BadRequest, "ttl must be an integer");
        q.ttl = d["ttl"].get<std::int64_t>();
    }
    return q;
}

SimRuntime::SimRuntime(ScenarioData scenario, std::uint64_t seed)
    : scenario_(std::move(scenario)), network_(scenario_.links), rng_(seed) {
    for (const auto& [id, cfg] : scenario_.configs) {
        platforms_.emplace(id, PlatformNode(cfg, scenario_.stores.at(id)));
    }
}

PlatformNode& SimRuntime::platform(const FirmId& firm) {
    auto it = platforms_.find(firm);
    if (it == platforms_.end()) {
        raise(Errc::BadRequest, "unknown firm " + firm);
    }
    return it->second;
}

AgentId SimRuntime::next_agent_id() {
    AgentId id{};
    for (int half = 0; half < 2; ++half) {
        std::uint64_t word = rng_();
        for (int i = 0; i < 8; ++i) {
            id[half * 8 + i] = std::uint8_t(word >> (8 * i));
        }
    }
    return id;
}

void SimRuntime::log_event(LogEvent::Kind kind, const FirmId& firm, const FirmId& peer,
                           const std::string& agent, const std::string& detail, std::size_t hop) {
    log_.push_back(LogEvent{kind, clock_.now_ms, firm, peer, agent, detail, hop});
}

AgentCapsule build_query_capsule(const ScenarioData& scenario, const QueryRequest& request,
                                 const AgentId& agent_id) {
    if (scenario.configs.find(request.home) == scenario.configs.end()) {
        raise(Errc::BadRequest, "unknown home firm " + request.home);
    }

    GoalSpec goal{TraceGoal{}};
    Itinerary itinerary;
    if (request.is_trace) {
        auto holder = scenario.directory.find(request.product);
        if (holder == scenario.directory.end()) {
            raise(Errc::BadRequest, "unknown product " + request.product);
        }
        goal = TraceGoal{request.product};
        itinerary = Itinerary{{holder->second}, 0, true};
    } else {
        request.criteria.validate();
        SearchGoal search{request.criteria, request.visit};
        if (request.visit) {
            if (request.visit->empty()) {
                raise(Errc::BadRequest, "explicit visit list is empty");
            }
            std::set<FirmId> seen;
            for (const auto& f : *request.visit) {
                if (scenario.configs.find(f) == scenario.configs.end()) {
                    raise(Errc::BadRequest, "visit list names unknown firm " + f);
                }
                if (f == request.home) {
                    raise(Errc::BadRequest, "visit list must not include the home firm");
                }
                if (!seen.insert(f).second) {
                    raise(Errc::BadRequest, "visit list repeats firm " + f);
                }
            }
            // User-specified order is taken verbatim.
            itinerary = Itinerary{*request.visit, 0, false};
        } else {
            std::set<FirmId> targets = resolve_targets(search, scenario, request.home);
            Route route = plan_route(request.home, targets, CostGraph::from_scenario(scenario));
            itinerary = Itinerary{route.order, 0, false};
        }
        goal = std::move(search);
    }

    Key32 first_key{}; // zero key for a home-local first stop; re-signed at forwarding
    const FirmId& first_stop = itinerary.planned.front();
    if (first_stop != request.home) {
        const auto& keys = scenario.configs.at(request.home).keys;
        auto k = keys.find(first_stop);
        if (k == keys.end()) {
            raise(Errc::Undeliverable, "home " + request.home + " has no key toward " + first_stop);
        }
        first_key = k->second;
    }

    return new_agent(goal, request.home, itinerary, request.ttl, first_key, agent_id);
}

QueryTicket SimRuntime::submit(const QueryRequest& request) {
    AgentCapsule capsule = build_query_capsule(scenario_, request, next_agent_id());

    std::string ticket_id = "T-" + std::to_string(++ticket_counter_);
    TicketState state;
    state.ticket = QueryTicket{ticket_id, capsule.agent_id_hex(), clock_.now_ms,
                               TicketStatus::InFlight, ""};
    state.request = request;
    state.echo = request.to_doc();
    state.traffic_before = traffic();
    tickets_.emplace(ticket_id, std::move(state));
    ticket_by_agent_[capsule.agent_id_hex()] = ticket_id;

    FirmId home = request.home;
    queue_.schedule(clock_.now_ms, [this, capsule, home] {
        log_event(LogEvent::Kind::LaunchGranted, home, "", capsule.agent_id_hex(), "scope=Full");
        handle_reaction(home, platform(home).launch(capsule, clock_.now_ms));
    });
    return tickets_.at(ticket_id).ticket;
}

void SimRuntime::handle_reaction(const FirmId& firm, Reaction reaction) {
    if (reaction.executed_agent) {
        std::size_t hop = reaction.executed_capsule ? reaction.executed_capsule->hops.size() : 0;
        std::string outcome = reaction.executed_capsule && !reaction.executed_capsule->hops.empty()
                                  ? hop_outcome_name(reaction.executed_capsule->hops.back().outcome)
                                  : "";
        log_event(LogEvent::Kind::ExecuteDone, firm, "", *reaction.executed_agent, outcome, hop);
        if (progress_ && reaction.executed_capsule) {
            report_progress(*reaction.executed_capsule);
        }
    }
    if (reaction.outbound) {
        start_dispatch(firm, *reaction.outbound);
    }
    if (reaction.delivered_home) {
        log_event(LogEvent::Kind::ResultHome, firm, "", reaction.delivered_home->agent_id_hex(),
                  "", reaction.delivered_home->hops.size());
        complete_ticket(*reaction.delivered_home);
    }
    if (reaction.error_notice) {
        log_event(LogEvent::Kind::ErrorNotice, firm, "", reaction.error_notice->agent_id_hex,
                  reaction.error_notice->message);
        fail_ticket(reaction.error_notice->agent_id_hex, reaction.error_notice->message);
    }
}

void SimRuntime::report_progress(const AgentCapsule& capsule) {
    TicketState* ts = state_by_agent(capsule.agent_id_hex());
    if (!ts) {
        return;
    }
    progress_(aggregate(capsule, ts->echo, true, traffic_since(ts->traffic_before)));
}

void SimRuntime::start_dispatch(const FirmId& from, const OutboundTransfer& out) {
    const auto& keys = platform(from).config().keys;
    auto key = keys.find(out.dest);
    if (key == keys.end()) {
        // frame_toward guards this; belt for directly-built outbounds
        log_event(LogEvent::Kind::Undeliverable, from, out.dest, out.agent_id_hex, "no key");
        fail_ticket(out.agent_id_hex, "no pre-shared key toward " + out.dest);
        return;
    }
    std::size_t idx = pending_.size();
    pending_.push_back(Pending{from, out.dest, out.type,
                               encode_frame(out.type, out.payload, key->second), out.agent_id_hex,
                               out.hop_index, 0, false, false});
    pending_index_[{from, out.agent_id_hex, out.hop_index}] = idx;
    attempt_send(idx);
}

void SimRuntime::attempt_send(std::size_t idx) {
    Pending& p = pending_[idx];
    if (p.settled) {
        return;
    }
    SimLink* link = network_.find_link(p.from, p.to);
    if (!link) {
        undeliverable(idx, "no link");
        return;
    }
    SendOutcome outcome = link_send(*link, p.from, p.frame, clock_);
    if (const auto* delivered = std::get_if<Delivered>(&outcome)) {
        log_event(LogEvent::Kind::FrameSent, p.from, p.to, p.agent_id,
                  std::string(msg_type_name(p.type)) + " " + std::to_string(p.frame.size()) + "B",
                  p.hop);
        Millis deadline =
            delivered->at_ms + link->latency_ms + platform(p.from).config().backoff_at(p.attempt);
        std::size_t attempt_before = p.attempt;
        queue_.schedule(delivered->at_ms, [this, idx] { deliver(idx, false); });
        queue_.schedule(deadline, [this, idx, attempt_before] {
            Pending& q = pending_[idx];
            if (q.settled || q.attempt != attempt_before) {
                return;
            }
            if (clock_.now_ms >= scenario_.horizon_ms) {
                undeliverable(idx, "no delivery confirmation before horizon");
                return;
            }
            q.attempt += 1;
            attempt_send(idx);
        });
    } else {
        log_event(LogEvent::Kind::SendDown, p.from, p.to, p.agent_id, msg_type_name(p.type), p.hop);
        Millis next = clock_.now_ms + platform(p.from).config().backoff_at(p.attempt);
        p.attempt += 1;
        if (next > scenario_.horizon_ms) {
            undeliverable(idx, "link not up before horizon");
            return;
        }
        log_event(LogEvent::Kind::RetryScheduled, p.from, p.to, p.agent_id, std::to_string(next),
                  p.hop);
        queue_.schedule(next, [this, idx] { attempt_send(idx); });
    }
}

void SimRuntime::deliver(std::size_t idx, bool duplicate) {
    if (dup_transfers_ && !duplicate && pending_[idx].type == MsgType::Transfer &&
        !pending_[idx].duplicated) {
        pending_[idx].duplicated = true;
        // The duplicate travelled alongside the original: same bytes, same
        // arrival instant, processed after it.
        if (SimLink* link = network_.find_link(pending_[idx].from, pending_[idx].to)) {
            if (pending_[idx].from == link->a) {
                link->bytes_a_to_b += pending_[idx].frame.size();
            } else {
                link->bytes_b_to_a += pending_[idx].frame.size();
            }
        }
        queue_.schedule(clock_.now_ms, [this, idx] { deliver(idx, true); });
    }

    const Pending p = pending_[idx];
    SimLink* link = network_.find_link(p.from, p.to);
    PlatformNode& receiver = platform(p.to);
    auto key = receiver.config().keys.find(p.from);
    if (key == receiver.config().keys.end()) {
        log_event(LogEvent::Kind::FrameDelivered, p.to, p.from, p.agent_id,
                  "dropped: no key for sender", p.hop);
        return;
    }
    Frame frame;
    try {
        frame = decode_frame(p.frame, key->second);
    } catch (const Error& e) {
        log_event(LogEvent::Kind::FrameDelivered, p.to, p.from, p.agent_id,
                  std::string("dropped: ") + e.what(), p.hop);
        return;
    }
    log_event(LogEvent::Kind::FrameDelivered, p.to, p.from, p.agent_id,
              std::string(msg_type_name(p.type)) + (duplicate ? " duplicate" : ""), p.hop);

    Reaction reaction = receiver.on_frame(frame.msg_type, frame.payload, p.from, clock_.now_ms);

    if (reaction.admission) {
        std::string agent = p.agent_id;
        std::size_t hop = p.hop;
        if (reaction.reply) {
            if (auto doc = parse_doc(reaction.reply->second); doc && doc->is_object()) {
                if (auto it = doc->find("agent_id"); it != doc->end() && it->is_string()) {
                    agent = it->get<std::string>();
                }
                if (auto it = doc->find("hop"); it != doc->end() && it->is_number_integer()) {
                    hop = it->get<std::size_t>();
                }
            }
        }
        if (const auto* granted = std::get_if<Granted>(&*reaction.admission)) {
            log_event(LogEvent::Kind::AdmissionGranted, p.to, p.from, agent,
                      scope_name(granted->scope), hop);
        } else {
            log_event(LogEvent::Kind::AdmissionRejected, p.to, p.from, agent,
                      reject_code_name(std::get<Rejected>(*reaction.admission).code), hop);
        }
    }

    if (reaction.reply && link) {
        std::string ctrl = encode_frame(reaction.reply->first, reaction.reply->second, key->second);
        SendOutcome outcome = link_send(*link, p.to, ctrl, clock_);
        if (const auto* delivered = std::get_if<Delivered>(&outcome)) {
            log_event(LogEvent::Kind::FrameSent, p.to, p.from, p.agent_id,
                      std::string(msg_type_name(reaction.reply->first)) + " " +
                          std::to_string(ctrl.size()) + "B",
                      p.hop);
            FirmId control_at = p.from;
            std::string payload = reaction.reply->second;
            queue_.schedule(delivered->at_ms,
                            [this, control_at, payload] { on_control(control_at, payload); });
        } else {
            log_event(LogEvent::Kind::ControlLost, p.to, p.from, p.agent_id,
                      msg_type_name(reaction.reply->first), p.hop);
        }
    }

    handle_reaction(p.to, std::move(reaction));
}

void SimRuntime::on_control(const FirmId& at, const std::string& payload) {
    auto doc = parse_doc(payload);
    if (!doc || !doc->is_object()) {
        return;
    }
    std::string agent = doc->contains("agent_id") && (*doc)["agent_id"].is_string()
                            ? (*doc)["agent_id"].get<std::string>()
                            : "";
    std::size_t hop = doc->contains("hop") && (*doc)["hop"].is_number_integer()
                          ? (*doc)["hop"].get<std::size_t>()
                          : 0;
    std::optional<RejectCode> code;
    if (doc->contains("code") && (*doc)["code"].is_string()) {
        code = reject_code_from_name((*doc)["code"].get<std::string>());
    }
    log_event(LogEvent::Kind::ControlReceived, at, "", agent,
              code ? reject_code_name(*code) : "ack", hop);

    auto it = pending_index_.find({at, agent, hop});
    if (it == pending_index_.end()) {
        return;
    }
    Pending& p = pending_[it->second];
    if (p.settled) {
        return;
    }
    p.settled = true;

    if (!code || *code == RejectCode::Replay) {
        // ACK, or proof the receiver already admitted this leg.
        platform(at).on_outbound_settled(agent);
        return;
    }
    platform(at).on_outbound_failed(agent);
    TicketState* ts = state_by_agent(agent);
    if (!ts) {
        return;
    }
    std::string reason = std::string("rejected at ") + p.to + ": " + reject_code_name(*code);
    if (at == ts->request.home) {
        fail_ticket(agent, reason);
        return;
    }
    const auto& cfg = platform(at).config();
    if (p.type == MsgType::Transfer && cfg.keys.count(ts->request.home) &&
        network_.find_link(at, ts->request.home)) {
        start_dispatch(at, OutboundTransfer{ts->request.home, MsgType::Result,
                                            make_error_result_payload(agent, at, p.hop, reason),
                                            agent, p.hop});
    } else {
        fail_ticket(agent, reason);
    }
}

void SimRuntime::undeliverable(std::size_t idx, const std::string& why) {
    Pending& p = pending_[idx];
    if (p.settled) {
        return;
    }
    p.settled = true;
    log_event(LogEvent::Kind::Undeliverable, p.from, p.to, p.agent_id, why, p.hop);
    platform(p.from).on_outbound_failed(p.agent_id);
    TicketState* ts = state_by_agent(p.agent_id);
    if (!ts) {
        return;
    }
    std::string reason = "undeliverable toward " + p.to + ": " + why;
    if (p.from == ts->request.home || p.type != MsgType::Transfer) {
        fail_ticket(p.agent_id, reason);
        return;
    }
    const auto& cfg = platform(p.from).config();
    if (cfg.keys.count(ts->request.home) && network_.find_link(p.from, ts->request.home)) {
        start_dispatch(p.from, OutboundTransfer{ts->request.home, MsgType::Result,
                                                make_error_result_payload(p.agent_id, p.from, p.hop,
                                                                          reason),
                                                p.agent_id, p.hop});
    } else {
        fail_ticket(p.agent_id, reason);
    }
}

SimRuntime::TicketState* SimRuntime::state_by_agent(const std::string& agent_id_hex) {
    auto it = ticket_by_agent_.find(agent_id_hex);
    if (it == ticket_by_agent_.end()) {
        return nullptr;
    }
    auto ts = tickets_.find(it->second);
    return ts == tickets_.end() ? nullptr : &ts->second;
}

std::vector<LinkTraffic> SimRuntime::traffic_since(const std::vector<LinkTraffic>& before) const {
    return diff_traffic(before, snapshot_traffic(network_));
}

void SimRuntime::complete_ticket(const AgentCapsule& capsule) {
    TicketState* ts = state_by_agent(capsule.agent_id_hex());
    if (!ts || ts->ticket.status != TicketStatus::InFlight) {
        return;
    }
    ts->ticket.status = TicketStatus::Completed;
    ts->report = aggregate(capsule, ts->echo, false, traffic_since(ts->traffic_before));
    log_event(LogEvent::Kind::TicketCompleted, ts->request.home, "", capsule.agent_id_hex(),
              ts->ticket.ticket_id);
}

void SimRuntime::fail_ticket(const std::string& agent_id_hex, const std::string& reason) {
    TicketState* ts = state_by_agent(agent_id_hex);
    if (!ts || ts->ticket.status != TicketStatus::InFlight) {
        return;
    }
    ts->ticket.status = TicketStatus::Failed;
    ts->ticket.failure_reason = reason;
    ts->report = failure_report(ts->echo, ts->request.home, agent_id_hex, reason);
    log_event(LogEvent::Kind::TicketFailed, ts->request.home, "", agent_id_hex, reason);
}

void SimRuntime::run() {
    while (!queue_.empty()) {
        queue_.run_next(clock_);
    }
    for (auto& [id, ts] : tickets_) {
        (void)id;
        if (ts.ticket.status == TicketStatus::InFlight) {
            fail_ticket(ts.ticket.agent_id_hex, "incomplete at horizon");
        }
    }
}

const QueryTicket& SimRuntime::ticket(const std::string& ticket_id) const {
    auto it = tickets_.find(ticket_id);
    if (it == tickets_.end()) {
        raise(Errc::BadRequest, "unknown ticket " + ticket_id);
    }
    return it->second.ticket;
}

const Report& SimRuntime::report(const std::string& ticket_id) const {
    auto it = tickets_.find(ticket_id);
    if (it == tickets_.end() || !it->second.report) {
        raise(Errc::BadRequest, "no report for ticket " + ticket_id);
    }
    return *it->second.report;
}

std::vector<std::string> SimRuntime::ticket_ids() const {
    std::vector<std::string> out;
    out.reserve(tickets_.size());
    for (const auto& [id, ts] : tickets_) {
        (void)ts;
        out.push_back(id);
    }
    return out;
}

std::vector<RegistryEntry> SimRuntime::registry(const FirmId& firm) const {
    return const_cast<SimRuntime*>(this)->platform(firm).registry_snapshot();
}

} // namespace agentnet
