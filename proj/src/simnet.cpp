#include "agentnet/simnet.hpp"

#include <algorithm>
#include <tuple>

namespace agentnet {

bool SimLink::up_at(Millis t) const {
    bool up = true;
    for (const auto& entry : schedule) {
        if (entry.from_ms > t) {
            break;
        }
        up = entry.up;
    }
    return up;
}

std::optional<Millis> SimLink::next_up_at(Millis t) const {
    if (up_at(t)) {
        return t;
    }
    for (const auto& entry : schedule) {
        if (entry.from_ms > t && entry.up) {
            return entry.from_ms;
        }
    }
    return std::nullopt;
}

SendOutcome link_send(SimLink& link, const FirmId& from, std::string_view frame_bytes,
                      const VirtualClock& clock) {
    if (!link.up_at(clock.now_ms)) {
        return Down{};
    }
    if (from == link.a) {
        link.bytes_a_to_b += frame_bytes.size();
    } else {
        link.bytes_b_to_a += frame_bytes.size();
    }
    return Delivered{clock.now_ms + link.latency_ms};
}

void EventQueue::schedule(Millis at, std::function<void()> fn) {
    heap_.push(Ev{at, next_seq_++, std::move(fn)});
}

Millis EventQueue::peek_time() const {
    if (heap_.empty()) {
        raise(Errc::QueueEmpty, "no scheduled events");
    }
    return heap_.top().at;
}

void EventQueue::run_next(VirtualClock& clock) {
    if (heap_.empty()) {
        raise(Errc::QueueEmpty, "no scheduled events");
    }
    // priority_queue::top is const; the heap is rebalanced by pop before the
    // event body runs so it may schedule freely.
    Ev ev = heap_.top();
    heap_.pop();
    clock.now_ms = std::max(clock.now_ms, ev.at);
    ev.fn();
}

SimNetwork::SimNetwork(std::vector<SimLink> links) : links_(std::move(links)) {}

SimLink* SimNetwork::find_link(const FirmId& x, const FirmId& y) {
    for (auto& l : links_) {
        if ((l.a == x && l.b == y) || (l.a == y && l.b == x)) {
            return &l;
        }
    }
    return nullptr;
}

const SimLink* SimNetwork::find_link(const FirmId& x, const FirmId& y) const {
    return const_cast<SimNetwork*>(this)->find_link(x, y);
}

std::uint64_t SimNetwork::total_bytes() const {
    std::uint64_t total = 0;
    for (const auto& l : links_) {
        total += l.bytes_a_to_b + l.bytes_b_to_a;
    }
    return total;
}

void SimNetwork::reset_counters() {
    for (auto& l : links_) {
        l.bytes_a_to_b = 0;
        l.bytes_b_to_a = 0;
    }
}

std::vector<LinkTraffic> snapshot_traffic(const SimNetwork& network) {
    std::vector<LinkTraffic> rows;
    rows.reserve(network.links().size());
    for (const auto& l : network.links()) {
        rows.push_back(LinkTraffic{l.a, l.b, l.bytes_a_to_b, l.bytes_b_to_a});
    }
    std::sort(rows.begin(), rows.end(), [](const LinkTraffic& x, const LinkTraffic& y) {
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    return rows;
}

std::vector<LinkTraffic> diff_traffic(const std::vector<LinkTraffic>& before,
                                      const std::vector<LinkTraffic>& after) {
    std::map<std::pair<FirmId, FirmId>, LinkTraffic> base;
    for (const auto& row : before) {
        base[{row.a, row.b}] = row;
    }
    std::vector<LinkTraffic> out;
    for (const auto& row : after) {
        LinkTraffic d = row;
        if (auto it = base.find({row.a, row.b}); it != base.end()) {
            d.a_to_b -= it->second.a_to_b;
            d.b_to_a -= it->second.b_to_a;
        }
        if (d.a_to_b || d.b_to_a) {
            out.push_back(d);
        }
    }
    return out;
}

std::uint64_t traffic_total(const std::vector<LinkTraffic>& rows) {
    std::uint64_t total = 0;
    for (const auto& row : rows) {
        total += row.both();
    }
    return total;
}

} // namespace agentnet
