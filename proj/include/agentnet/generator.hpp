#pragma once

#include <random>

#include "agentnet/runtime.hpp"

namespace agentnet {

// Seeded scenario generation for harness batteries and benchmarks.
enum class TrustPolicy {
    AtLeastKnown, // every pair Known or Trusted: traceability always possible
    Mixed,        // Unknown/Known/Trusted per pair
    UniformTrusted,
    UniformKnown,
    UniformUnknown,
};

struct GenParams {
    int firms = 5;
    int products = 20;
    int max_chain = 4;
    TrustPolicy trust = TrustPolicy::AtLeastKnown;
    int desc_len = 160; // free-text attribute payload per record
    Millis min_latency = 10;
    Millis max_latency = 120;
};

ScenarioData generate_scenario(const GenParams& params, std::uint64_t seed);

// Same scenario with every trust relation replaced by one level.
ScenarioData with_uniform_trust(ScenarioData scenario, TrustLevel level);

// Random but well-formed queries over a generated scenario.
QueryRequest random_trace_query(const ScenarioData& scenario, std::mt19937_64& rng);
QueryRequest random_search_query(const ScenarioData& scenario, std::mt19937_64& rng,
                                 bool allow_commercial = false);
// Always at least two conjuncts: the selective multi-field searches the
// interface agent is built for.
QueryRequest random_selective_search_query(const ScenarioData& scenario, std::mt19937_64& rng);

// The benchmark pair: 5 firms, 1000 records per firm, a category selecting
// ~1% of each store, all links up.
ScenarioData bench_scenario(std::uint64_t seed);
QueryRequest bench_query(const ScenarioData& scenario);

} // namespace agentnet
