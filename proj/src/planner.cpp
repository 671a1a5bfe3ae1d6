#include "agentnet/planner.hpp"

#include <algorithm>
#include <limits>

namespace agentnet {

void CostGraph::add_edge(const FirmId& x, const FirmId& y, Millis c) {
    firms.insert(x);
    firms.insert(y);
    auto pair = std::minmax(x, y);
    cost[{pair.first, pair.second}] = c;
}

std::optional<Millis> CostGraph::edge(const FirmId& x, const FirmId& y) const {
    if (x == y) {
        return 0;
    }
    auto pair = std::minmax(x, y);
    auto it = cost.find({pair.first, pair.second});
    if (it == cost.end()) {
        return std::nullopt;
    }
    return it->second;
}

CostGraph CostGraph::from_scenario(const ScenarioData& scenario) {
    CostGraph g;
    for (const auto& id : scenario.firm_ids()) {
        g.firms.insert(id);
    }
    for (const auto& link : scenario.links) {
        g.add_edge(link.a, link.b, link.latency_ms);
    }
    return g;
}

std::set<FirmId> resolve_targets(const SearchGoal& goal, const ScenarioData& scenario,
                                 const FirmId& home) {
    std::set<FirmId> targets;
    if (goal.visit) {
        targets.insert(goal.visit->begin(), goal.visit->end());
    } else if (goal.criteria.supplier) {
        auto it = scenario.supplier_index.find(*goal.criteria.supplier);
        if (it != scenario.supplier_index.end()) {
            targets = it->second;
        }
        targets.erase(home);
    } else {
        for (const auto& id : scenario.firm_ids()) {
            if (id != home) {
                targets.insert(id);
            }
        }
    }
    if (targets.empty()) {
        raise(Errc::NoTargets, "no firms to visit for this search");
    }
    return targets;
}

Millis route_cost(const std::vector<FirmId>& order, const FirmId& home, const CostGraph& graph) {
    Millis total = 0;
    const FirmId* prev = &home;
    for (const auto& stop : order) {
        auto c = graph.edge(*prev, stop);
        if (!c) {
            raise(Errc::MissingEdge, "no edge " + *prev + "-" + stop);
        }
        total += *c;
        prev = &stop;
    }
    return total;
}

namespace {

constexpr Millis kInf = std::numeric_limits<Millis>::max() / 4;

[[noreturn]] void report_unreachable(const FirmId& home, const std::vector<FirmId>& targets,
                                     const CostGraph& graph) {
    for (const auto& t : targets) {
        bool connected = graph.edge(home, t).has_value();
        for (const auto& other : targets) {
            connected = connected || (other != t && graph.edge(other, t).has_value());
        }
        if (!connected) {
            raise(Errc::Unreachable, "target " + t + " has no usable link");
        }
    }
    raise(Errc::Unreachable, "target " + targets.front() + " cannot be reached on any route");
}

Route exact_route(const FirmId& home, const std::vector<FirmId>& targets, const CostGraph& graph) {
    const std::size_t n = targets.size();
    std::vector<std::vector<Millis>> pair_cost(n, std::vector<Millis>(n, kInf));
    std::vector<Millis> entry_cost(n, kInf);
    for (std::size_t i = 0; i < n; ++i) {
        if (auto c = graph.edge(home, targets[i])) {
            entry_cost[i] = *c;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (auto c = graph.edge(targets[i], targets[j])) {
                pair_cost[i][j] = *c;
            }
        }
    }

    // Held-Karp over (visited subset, last stop).
    const std::size_t full = std::size_t(1) << n;
    std::vector<std::vector<Millis>> best(full, std::vector<Millis>(n, kInf));
    std::vector<std::vector<int>> prev(full, std::vector<int>(n, -1));
    for (std::size_t i = 0; i < n; ++i) {
        best[std::size_t(1) << i][i] = entry_cost[i];
    }
    for (std::size_t mask = 1; mask < full; ++mask) {
        for (std::size_t last = 0; last < n; ++last) {
            if (!(mask & (std::size_t(1) << last)) || best[mask][last] >= kInf) continue;
            for (std::size_t next = 0; next < n; ++next) {
                if (mask & (std::size_t(1) << next)) continue;
                Millis step = pair_cost[last][next];
                if (step >= kInf) continue;
                std::size_t next_mask = mask | (std::size_t(1) << next);
                Millis candidate = best[mask][last] + step;
                if (candidate < best[next_mask][next]) {
                    best[next_mask][next] = candidate;
                    prev[next_mask][next] = int(last);
                }
            }
        }
    }

    std::size_t final_mask = full - 1;
    std::size_t final_last = n;
    Millis final_cost = kInf;
    for (std::size_t last = 0; last < n; ++last) {
        if (best[final_mask][last] < final_cost) {
            final_cost = best[final_mask][last];
            final_last = last;
        }
    }
    if (final_last == n) {
        report_unreachable(home, targets, graph);
    }

    std::vector<FirmId> order(n);
    std::size_t mask = final_mask;
    std::size_t last = final_last;
    for (std::size_t i = n; i-- > 0;) {
        order[i] = targets[last];
        int p = prev[mask][last];
        mask &= ~(std::size_t(1) << last);
        if (p < 0) break;
        last = std::size_t(p);
    }
    return Route{std::move(order), final_cost, true};
}

Route nearest_neighbor_route(const FirmId& home, const std::vector<FirmId>& targets,
                             const CostGraph& graph) {
    std::vector<FirmId> remaining = targets; // already ascending
    std::vector<FirmId> order;
    order.reserve(targets.size());
    Millis total = 0;
    FirmId current = home;
    while (!remaining.empty()) {
        std::size_t pick = remaining.size();
        Millis pick_cost = kInf;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            auto c = graph.edge(current, remaining[i]);
            if (c && *c < pick_cost) { // strict <: ties keep the ascending-id candidate
                pick_cost = *c;
                pick = i;
            }
        }
        if (pick == remaining.size()) {
            report_unreachable(home, targets, graph);
        }
        total += pick_cost;
        current = remaining[pick];
        order.push_back(current);
        remaining.erase(remaining.begin() + long(pick));
    }
    return Route{std::move(order), total, false};
}

} // namespace

Route plan_route(const FirmId& home, const std::set<FirmId>& targets, const CostGraph& graph) {
    if (targets.empty()) {
        raise(Errc::NoTargets, "cannot plan a route over zero targets");
    }
    std::vector<FirmId> list(targets.begin(), targets.end());
    if (list.size() <= kExactRouteLimit) {
        return exact_route(home, list, graph);
    }
    return nearest_neighbor_route(home, list, graph);
}

Route plan_route_nearest_neighbor(const FirmId& home, const std::set<FirmId>& targets,
                                  const CostGraph& graph) {
    if (targets.empty()) {
        raise(Errc::NoTargets, "cannot plan a route over zero targets");
    }
    std::vector<FirmId> list(targets.begin(), targets.end());
    return nearest_neighbor_route(home, list, graph);
}

} // namespace agentnet
