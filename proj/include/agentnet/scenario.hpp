#pragma once

#include <set>

#include "agentnet/firmstore.hpp"
#include "agentnet/platform.hpp"
#include "agentnet/simnet.hpp"

namespace agentnet {

// A fully validated scenario: one platform config and store per firm, the
// link map, and the global derived indexes agents are launched from.
struct ScenarioData {
    std::map<FirmId, PlatformConfig> configs;
    std::map<FirmId, FirmStore> stores;
    std::vector<SimLink> links;
    std::map<ProductId, ProductRecord> catalog;
    std::map<ProductId, std::vector<CustodyEvent>> custody_by_product;
    std::map<ProductId, FirmId> directory; // product -> current holder
    // supplier -> firms that received the supplier's goods (origin/registration
    // events do not count as holdings of supplied goods).
    std::map<FirmId, std::set<FirmId>> supplier_index;
    Millis horizon_ms = 86'400'000;

    std::vector<FirmId> firm_ids() const;
};

// Parses and validates a scenario document. Every product's custody events
// must form one consistent chain; all referenced ids must exist; pair
// keys must agree on both sides. Throws ScenarioInvalid naming the offender.
ScenarioData ingest_scenario(const Doc& document);
ScenarioData ingest_scenario_text(std::string_view text);
ScenarioData ingest_scenario_file(const std::string& path);

Doc scenario_to_doc(const ScenarioData& scenario);

} // namespace agentnet
