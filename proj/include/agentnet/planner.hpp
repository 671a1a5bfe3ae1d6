#pragma once

#include "agentnet/agent.hpp"
#include "agentnet/scenario.hpp"

namespace agentnet {

// Symmetric link-cost graph for route planning; the cost metric is the
// scenario's per-link latency. A missing pair is unreachable.
struct CostGraph {
    std::set<FirmId> firms;
    std::map<std::pair<FirmId, FirmId>, Millis> cost; // key normalized (min, max)

    void add_edge(const FirmId& x, const FirmId& y, Millis c);
    // cost(a, a) = 0; nullopt for a missing pair.
    std::optional<Millis> edge(const FirmId& x, const FirmId& y) const;

    static CostGraph from_scenario(const ScenarioData& scenario);
};

struct Route {
    std::vector<FirmId> order; // permutation of the target set, first hop first
    Millis total_cost = 0;
    bool exact = false; // produced by the exact solver
};

// Firms a search agent must visit: the explicit visit list verbatim when
// given, else the supplier holdings index, else every firm. The home firm is
// never a target (local data needs no migration). Throws NoTargets.
std::set<FirmId> resolve_targets(const SearchGoal& goal, const ScenarioData& scenario,
                                 const FirmId& home);

// Sum of edge costs home -> order[0] -> order[1] -> ... Throws MissingEdge.
Millis route_cost(const std::vector<FirmId>& order, const FirmId& home, const CostGraph& graph);

inline constexpr std::size_t kExactRouteLimit = 12;

// Minimum-cost open path over the targets starting from home. Exact
// (Held-Karp) up to kExactRouteLimit targets, nearest-neighbor with
// ascending-FirmId tie-break above it. Throws Unreachable naming the first
// target that cannot be reached.
Route plan_route(const FirmId& home, const std::set<FirmId>& targets, const CostGraph& graph);

// The fallback heuristic on its own, any target count. Never cheaper than
// the exact solver on the same instance.
Route plan_route_nearest_neighbor(const FirmId& home, const std::set<FirmId>& targets,
                                  const CostGraph& graph);

} // namespace agentnet
