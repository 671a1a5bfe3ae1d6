#include "agentnet/platform.hpp"

#include <algorithm>

namespace agentnet {

Millis PlatformConfig::backoff_at(std::size_t attempt) const {
    if (retry_backoff_ms.empty()) {
        return 1000;
    }
    return retry_backoff_ms[std::min(attempt, retry_backoff_ms.size() - 1)];
}

const char* reject_code_name(RejectCode c) {
    switch (c) {
    case RejectCode::BadSignature: return "BadSignature";
    case RejectCode::UnknownOrigin: return "UnknownOrigin";
    case RejectCode::SchemaInvalid: return "SchemaInvalid";
    case RejectCode::BehaviorNotAllowed: return "BehaviorNotAllowed";
    case RejectCode::TtlExhausted: return "TtlExhausted";
    case RejectCode::Replay: break;
    }
    return "Replay";
}

std::optional<RejectCode> reject_code_from_name(std::string_view name) {
    if (name == "BadSignature") return RejectCode::BadSignature;
    if (name == "UnknownOrigin") return RejectCode::UnknownOrigin;
    if (name == "SchemaInvalid") return RejectCode::SchemaInvalid;
    if (name == "BehaviorNotAllowed") return RejectCode::BehaviorNotAllowed;
    if (name == "TtlExhausted") return RejectCode::TtlExhausted;
    if (name == "Replay") return RejectCode::Replay;
    return std::nullopt;
}

AccessScope assign_scope(const FirmId& origin, const PlatformConfig& config) {
    if (origin == config.firm) {
        return AccessScope::Full;
    }
    auto it = config.trust.find(origin);
    if (it == config.trust.end()) {
        return AccessScope::Minimal;
    }
    return scope_for_trust(it->second);
}

void ReplayWindow::insert(const std::string& key) {
    if (set_.insert(key).second) {
        order_.push_back(key);
        if (order_.size() > capacity_) {
            set_.erase(order_.front());
            order_.pop_front();
        }
    }
}

namespace {

std::string replay_key(const AgentCapsule& capsule, AdmitKind kind) {
    return capsule.agent_id_hex() + "/" + std::to_string(capsule.hops.size()) +
           (kind == AdmitKind::Result ? "/r" : "/t");
}

} // namespace

AdmitOutcome admit(std::string_view payload, const FirmId& claimed_origin,
                   const PlatformConfig& config, ReplayWindow& window, AdmitKind kind) {
    auto key = config.keys.find(claimed_origin);
    if (key == config.keys.end()) {
        return {Rejected{RejectCode::UnknownOrigin}, std::nullopt};
    }
    if (!verify_payload_signature(payload, key->second)) {
        return {Rejected{RejectCode::BadSignature}, std::nullopt};
    }

    AgentCapsule capsule;
    try {
        capsule = decode_capsule(payload);
        if (kind == AdmitKind::Transfer) {
            if (capsule.itinerary.exhausted() ||
                capsule.itinerary.planned[capsule.itinerary.position] != config.firm) {
                raise(Errc::CapsuleMalformed, "capsule is not routed to this platform");
            }
        } else {
            if (capsule.home != config.firm) {
                raise(Errc::CapsuleMalformed, "result capsule is not homed here");
            }
        }
    } catch (const Error&) {
        return {Rejected{RejectCode::SchemaInvalid}, std::nullopt};
    }

    if (kind == AdmitKind::Transfer) {
        if (config.behavior_whitelist.count(capsule.behavior) == 0) {
            return {Rejected{RejectCode::BehaviorNotAllowed}, std::move(capsule)};
        }
        if (capsule.ttl <= 0 || capsule.ttl > config.ttl_cap) {
            return {Rejected{RejectCode::TtlExhausted}, std::move(capsule)};
        }
    }

    std::string rkey = replay_key(capsule, kind);
    if (window.contains(rkey)) {
        return {Rejected{RejectCode::Replay}, std::move(capsule)};
    }
    window.insert(rkey);
    return {Granted{assign_scope(capsule.home, config)}, std::move(capsule)};
}

const char* registry_state_name(RegistryState s) {
    switch (s) {
    case RegistryState::Running: return "Running";
    case RegistryState::AwaitingTransfer: return "AwaitingTransfer";
    case RegistryState::Departed: return "Departed";
    case RegistryState::Rejected: break;
    }
    return "Rejected";
}

std::string make_ack_payload(const std::string& agent_id_hex, std::size_t hop_index) {
    Doc d = Doc::object();
    d["agent_id"] = agent_id_hex;
    d["hop"] = static_cast<std::int64_t>(hop_index);
    return canonical_encode(d);
}

std::string make_reject_payload(const std::string& agent_id_hex, std::size_t hop_index,
                                RejectCode code) {
    Doc d = Doc::object();
    d["agent_id"] = agent_id_hex;
    d["hop"] = static_cast<std::int64_t>(hop_index);
    d["code"] = reject_code_name(code);
    return canonical_encode(d);
}

std::string make_error_result_payload(const std::string& agent_id_hex, const FirmId& at_firm,
                                      std::size_t hop_index, const std::string& message) {
    Doc d = Doc::object();
    d["agent_id"] = agent_id_hex;
    d["at_firm"] = at_firm;
    d["hop"] = static_cast<std::int64_t>(hop_index);
    d["error"] = message;
    return canonical_encode(d);
}

namespace {

// Best-effort identity of a payload that may not be schema-valid, so a
// REJECT can still name the agent and hop it concerns.
std::pair<std::string, std::size_t> probe_identity(std::string_view payload) {
    auto doc = parse_doc(payload);
    std::pair<std::string, std::size_t> out{"", 0};
    if (!doc || !doc->is_object()) {
        return out;
    }
    if (auto it = doc->find("agent_id"); it != doc->end() && it->is_string()) {
        out.first = it->get<std::string>();
    }
    if (auto it = doc->find("hops"); it != doc->end() && it->is_array()) {
        out.second = it->size();
    }
    return out;
}

} // namespace

PlatformNode::PlatformNode(PlatformConfig config, FirmStore store)
    : config_(std::move(config)), store_(std::move(store)) {
    behaviors_[kBehaviorTrace] = [](AgentCapsule c, const FirmId& firm,
                                    const ScopedStoreAccess& access, Millis now) {
        return execute_at(std::move(c), firm, access, now);
    };
    behaviors_[kBehaviorSearch] = behaviors_[kBehaviorTrace];
}

void PlatformNode::register_behavior(const std::string& id, BehaviorFn fn) {
    behaviors_[id] = std::move(fn);
}

RegistryEntry& PlatformNode::upsert_entry(const AgentCapsule& capsule, Millis now) {
    registry_.push_back(RegistryEntry{capsule.agent_id_hex(), capsule.home, capsule.behavior,
                                      RegistryState::Running, now, next_seq_++});
    return registry_.back();
}

void PlatformNode::set_state(const std::string& agent_id_hex, RegistryState state) {
    for (auto it = registry_.rbegin(); it != registry_.rend(); ++it) {
        if (it->agent_id_hex == agent_id_hex) {
            it->state = state;
            return;
        }
    }
}

OutboundTransfer PlatformNode::frame_toward(const AgentCapsule& capsule, const FirmId& dest,
                                            MsgType type) {
    auto key = config_.keys.find(dest);
    if (key == config_.keys.end()) {
        raise(Errc::BadConfig, "no pre-shared key toward " + dest);
    }
    AgentCapsule outgoing = capsule;
    sign_capsule(outgoing, key->second);
    return OutboundTransfer{dest, type, encode_capsule(outgoing), outgoing.agent_id_hex(),
                            outgoing.hops.size()};
}

Reaction PlatformNode::run_agent(AgentCapsule capsule, AccessScope scope, Millis now) {
    Reaction reaction;
    upsert_entry(capsule, now);
    const std::string id = capsule.agent_id_hex();
    const FirmId home = capsule.home;
    const std::size_t hops_before = capsule.hops.size();
    auto behavior = behaviors_.find(capsule.behavior);
    try {
        if (behavior == behaviors_.end()) {
            raise(Errc::BadConfig, "behavior '" + capsule.behavior + "' is not registered here");
        }
        ScopedStoreAccess access(store_, scope);
        ExecuteResult result = behavior->second(std::move(capsule), config_.firm, access, now);
        reaction.executed_agent = id;
        reaction.executed_capsule = result.capsule;
        if (const auto* migrate = std::get_if<NextMigrate>(&result.next)) {
            reaction.outbound = frame_toward(result.capsule, migrate->dest, MsgType::Transfer);
            set_state(id, RegistryState::AwaitingTransfer);
        } else if (config_.firm == result.capsule.home) {
            set_state(id, RegistryState::Departed);
            reaction.delivered_home = std::move(result.capsule);
        } else {
            reaction.outbound = frame_toward(result.capsule, result.capsule.home, MsgType::Result);
            set_state(id, RegistryState::AwaitingTransfer);
        }
    } catch (const std::exception& e) {
        set_state(id, RegistryState::Rejected);
        if (home == config_.firm) {
            reaction.error_notice = ErrorNotice{id, e.what()};
        } else {
            auto key = config_.keys.find(home);
            if (key != config_.keys.end()) {
                reaction.outbound = OutboundTransfer{
                    home, MsgType::Result,
                    make_error_result_payload(id, config_.firm, hops_before, e.what()), id,
                    hops_before};
            } else {
                reaction.error_notice = ErrorNotice{id, e.what()};
            }
        }
    }
    return reaction;
}

Reaction PlatformNode::on_frame(MsgType type, std::string_view payload, const FirmId& sender,
                                Millis now) {
    Reaction reaction;
    if (type == MsgType::Hello) {
        reaction.reply = {MsgType::Ack, std::string("{}")};
        return reaction;
    }
    if (type != MsgType::Transfer && type != MsgType::Result) {
        return reaction; // ACK/REJECT are settled by the transport driver
    }

    if (type == MsgType::Result) {
        // Error notices are plain authenticated frames, not agents.
        auto doc = parse_doc(payload);
        if (doc && doc->is_object() && doc->contains("error")) {
            std::string id = doc->contains("agent_id") && (*doc)["agent_id"].is_string()
                                 ? (*doc)["agent_id"].get<std::string>()
                                 : "";
            std::size_t hop = doc->contains("hop") && (*doc)["hop"].is_number_integer()
                                  ? (*doc)["hop"].get<std::size_t>()
                                  : 0;
            reaction.reply = {MsgType::Ack, make_ack_payload(id, hop)};
            std::string message = (*doc)["error"].is_string() ? (*doc)["error"].get<std::string>()
                                                              : std::string("agent failed remotely");
            reaction.error_notice = ErrorNotice{id, message};
            return reaction;
        }
    }

    AdmitKind kind = type == MsgType::Result ? AdmitKind::Result : AdmitKind::Transfer;
    AdmitOutcome outcome = admit(payload, sender, config_, replay_, kind);
    reaction.admission = outcome.admission;

    if (const auto* rejected = std::get_if<Rejected>(&outcome.admission)) {
        auto [id, hop] = probe_identity(payload);
        reaction.reply = {MsgType::Reject, make_reject_payload(id, hop, rejected->code)};
        return reaction;
    }

    const auto& granted = std::get<Granted>(outcome.admission);
    AgentCapsule capsule = std::move(*outcome.capsule);
    reaction.reply = {MsgType::Ack, make_ack_payload(capsule.agent_id_hex(), capsule.hops.size())};

    if (type == MsgType::Result) {
        upsert_entry(capsule, now);
        set_state(capsule.agent_id_hex(), RegistryState::Departed);
        reaction.delivered_home = std::move(capsule);
        return reaction;
    }

    Reaction run = run_agent(std::move(capsule), granted.scope, now);
    run.admission = reaction.admission;
    run.reply = reaction.reply;
    return run;
}

Reaction PlatformNode::launch(AgentCapsule capsule, Millis now) {
    Reaction reaction;
    reaction.admission = Granted{AccessScope::Full};
    if (!capsule.itinerary.exhausted() &&
        capsule.itinerary.planned[capsule.itinerary.position] == config_.firm) {
        // First stop is this very platform: run locally before any frame leaves.
        Reaction run = run_agent(std::move(capsule), AccessScope::Full, now);
        run.admission = reaction.admission;
        return run;
    }
    upsert_entry(capsule, now);
    const std::string id = capsule.agent_id_hex();
    try {
        FirmId first = capsule.itinerary.planned.at(capsule.itinerary.position);
        reaction.outbound = frame_toward(capsule, first, MsgType::Transfer);
        set_state(id, RegistryState::AwaitingTransfer);
    } catch (const std::exception& e) {
        set_state(id, RegistryState::Rejected);
        reaction.error_notice = ErrorNotice{id, e.what()};
    }
    return reaction;
}

void PlatformNode::on_outbound_settled(const std::string& agent_id_hex) {
    // Latest entry still awaiting its transfer; a settled error-result leg
    // must not revive a Rejected entry, and a later visit by the same agent
    // must not shadow an earlier unsettled one.
    for (auto it = registry_.rbegin(); it != registry_.rend(); ++it) {
        if (it->agent_id_hex == agent_id_hex && it->state == RegistryState::AwaitingTransfer) {
            it->state = RegistryState::Departed;
            return;
        }
    }
}

void PlatformNode::on_outbound_failed(const std::string& agent_id_hex) {
    for (auto it = registry_.rbegin(); it != registry_.rend(); ++it) {
        if (it->agent_id_hex == agent_id_hex &&
            (it->state == RegistryState::Running || it->state == RegistryState::AwaitingTransfer)) {
            it->state = RegistryState::Rejected;
            return;
        }
    }
}

std::vector<RegistryEntry> PlatformNode::registry_snapshot() const {
    std::vector<RegistryEntry> out = registry_;
    std::sort(out.begin(), out.end(), [](const RegistryEntry& x, const RegistryEntry& y) {
        if (x.admitted_at != y.admitted_at) return x.admitted_at < y.admitted_at;
        return x.seq < y.seq;
    });
    return out;
}

} // namespace agentnet
