#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "agentnet/scenario.hpp"

namespace agentnet::testing {

inline ScenarioData load_s1() {
    return ingest_scenario_file(std::string(SCENARIO_DIR) + "/s1.json");
}

inline Doc s1_doc() {
    std::ifstream in(std::string(SCENARIO_DIR) + "/s1.json", std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return *parse_doc(buf.str());
}

inline Key32 key_from_hex(const std::string& hex) {
    Key32 key{};
    from_hex(hex, key);
    return key;
}

// The pair key A-B from s1.json.
inline Key32 s1_key_ab() {
    return key_from_hex("abababababababababababababababababababababababababababababababab");
}

inline AgentId agent_id_from(std::uint64_t n) {
    AgentId id{};
    for (int i = 0; i < 8; ++i) {
        id[i] = std::uint8_t(n >> (8 * i));
    }
    return id;
}

} // namespace agentnet::testing
