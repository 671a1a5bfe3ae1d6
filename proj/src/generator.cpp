#include "agentnet/generator.hpp"

#include <algorithm>

#include "agentnet/planner.hpp"

namespace agentnet {

namespace {

std::uint64_t pick(std::mt19937_64& rng, std::uint64_t n) {
    return n ? rng() % n : 0;
}

std::string hex_key(std::mt19937_64& rng) {
    std::uint8_t bytes[32];
    for (int i = 0; i < 32; i += 8) {
        std::uint64_t word = rng();
        for (int j = 0; j < 8; ++j) {
            bytes[i + j] = std::uint8_t(word >> (8 * j));
        }
    }
    return to_hex(bytes, sizeof(bytes));
}

std::string pseudo_text(std::mt19937_64& rng, int len) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz    ";
    std::string out;
    out.reserve(std::size_t(len));
    for (int i = 0; i < len; ++i) {
        out.push_back(alphabet[pick(rng, sizeof(alphabet) - 1)]);
    }
    return out;
}

const std::vector<std::string>& categories() {
    static const std::vector<std::string> pool = {"bearing", "gasket", "seal",
                                                  "valve",   "bolt",   "flange"};
    return pool;
}

const std::vector<std::string>& materials() {
    static const std::vector<std::string> pool = {"steel", "ceramic", "brass", "polymer"};
    return pool;
}

std::string firm_name(int i) {
    return std::string(1, char('A' + i));
}

} // namespace

ScenarioData generate_scenario(const GenParams& params, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int n = std::max(1, params.firms);

    Doc doc = Doc::object();
    std::vector<std::string> firms;
    for (int i = 0; i < n; ++i) {
        firms.push_back(firm_name(i));
    }

    std::map<std::string, std::map<std::string, std::string>> keys;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            std::string key = hex_key(rng);
            keys[firms[i]][firms[j]] = key;
            keys[firms[j]][firms[i]] = key;
        }
    }

    Doc firms_doc = Doc::array();
    for (int i = 0; i < n; ++i) {
        Doc f = Doc::object();
        f["id"] = firms[i];
        f["keys"] = keys[firms[i]];
        Doc trust = Doc::object();
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            switch (params.trust) {
            case TrustPolicy::AtLeastKnown:
                trust[firms[j]] = pick(rng, 2) ? "Trusted" : "Known";
                break;
            case TrustPolicy::Mixed: {
                std::uint64_t r = pick(rng, 3);
                if (r == 1) trust[firms[j]] = "Known";
                if (r == 2) trust[firms[j]] = "Trusted";
                break; // r == 0: absent, i.e. Unknown
            }
            case TrustPolicy::UniformTrusted: trust[firms[j]] = "Trusted"; break;
            case TrustPolicy::UniformKnown: trust[firms[j]] = "Known"; break;
            case TrustPolicy::UniformUnknown: trust[firms[j]] = "Unknown"; break;
            }
        }
        f["trust"] = trust;
        firms_doc.push_back(f);
    }
    doc["firms"] = firms_doc;

    Doc links_doc = Doc::array();
    const Millis span = std::max<Millis>(1, params.max_latency - params.min_latency + 1);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Doc l = Doc::object();
            l["a"] = firms[i];
            l["b"] = firms[j];
            l["latency_ms"] = params.min_latency + Millis(pick(rng, std::uint64_t(span)));
            links_doc.push_back(l);
        }
    }
    doc["links"] = links_doc;

    Doc products_doc = Doc::array();
    Doc custody_doc = Doc::array();
    for (int p = 0; p < params.products; ++p) {
        char id[16];
        std::snprintf(id, sizeof(id), "P-%04d", p);
        int supplier = int(pick(rng, std::uint64_t(n)));

        Doc record = Doc::object();
        record["product"] = std::string(id);
        record["category"] = categories()[pick(rng, categories().size())];
        record["supplier"] = firms[std::size_t(supplier)];
        Millis made = 1'500'000'000'000LL + Millis(pick(rng, 200'000'000'000ULL));
        record["manufacture_date"] = made;
        Doc attrs = Doc::object();
        attrs["material"] = materials()[pick(rng, materials().size())];
        attrs["grade"] = "G" + std::to_string(1 + pick(rng, 4));
        attrs["lot"] = "L-" + std::to_string(1000 + pick(rng, 9000));
        attrs["desc"] = pseudo_text(rng, params.desc_len);
        record["attributes"] = attrs;
        Doc commercial = Doc::object();
        commercial["price"] = std::to_string(1 + pick(rng, 500)) + "." +
                              std::to_string(10 + pick(rng, 90));
        commercial["contract"] = "CT-" + std::to_string(100 + pick(rng, 900));
        record["commercial"] = commercial;
        products_doc.push_back(record);

        // Custody chain: starts at the supplier, extends over distinct firms.
        int chain_len = 1 + int(pick(rng, std::uint64_t(std::min(params.max_chain, n))));
        std::vector<int> chain{supplier};
        std::vector<int> others;
        for (int f = 0; f < n; ++f) {
            if (f != supplier) others.push_back(f);
        }
        for (int k = 1; k < chain_len && !others.empty(); ++k) {
            std::size_t at = pick(rng, others.size());
            chain.push_back(others[at]);
            others.erase(others.begin() + long(at));
        }

        Millis t = made + 86'400'000;
        for (std::size_t k = 0; k < chain.size(); ++k) {
            Doc e = Doc::object();
            e["product"] = std::string(id);
            e["firm"] = firms[std::size_t(chain[k])];
            if (k > 0) {
                e["received_from"] = firms[std::size_t(chain[k - 1])];
            }
            e["received_at"] = t;
            if (k + 1 < chain.size()) {
                Millis shipped = t + 3'600'000;
                e["shipped_to"] = firms[std::size_t(chain[k + 1])];
                e["shipped_at"] = shipped;
                t = shipped + 3'600'000;
            }
            custody_doc.push_back(e);
        }
    }
    doc["products"] = products_doc;
    doc["custody"] = custody_doc;

    return ingest_scenario(doc);
}

ScenarioData with_uniform_trust(ScenarioData scenario, TrustLevel level) {
    for (auto& [id, cfg] : scenario.configs) {
        cfg.trust.clear();
        for (const auto& [peer, other] : scenario.configs) {
            (void)other;
            if (peer != id) {
                cfg.trust[peer] = level;
            }
        }
    }
    return scenario;
}

QueryRequest random_trace_query(const ScenarioData& scenario, std::mt19937_64& rng) {
    QueryRequest q;
    q.is_trace = true;
    auto it = scenario.directory.begin();
    std::advance(it, long(pick(rng, scenario.directory.size())));
    q.product = it->first;
    auto firms = scenario.firm_ids();
    q.home = firms[pick(rng, firms.size())];
    q.ttl = 16;
    return q;
}

QueryRequest random_search_query(const ScenarioData& scenario, std::mt19937_64& rng,
                                 bool allow_commercial) {
    auto firms = scenario.firm_ids();
    for (int attempt = 0; attempt < 32; ++attempt) {
        QueryRequest q;
        q.is_trace = false;
        q.home = firms[pick(rng, firms.size())];
        q.ttl = 16;

        if (pick(rng, 2)) {
            q.criteria.category = categories()[pick(rng, categories().size())];
        }
        if (pick(rng, 5) < 2) {
            q.criteria.supplier = firms[pick(rng, firms.size())];
        }
        if (pick(rng, 10) < 3) {
            Millis lo = 1'500'000'000'000LL + Millis(pick(rng, 150'000'000'000ULL));
            q.criteria.made_after = lo;
            q.criteria.made_before = lo + 80'000'000'000LL;
        }
        if (pick(rng, 10) < 3) {
            q.criteria.attribute_equals["material"] = materials()[pick(rng, materials().size())];
        }
        if (allow_commercial && pick(rng, 4) == 0 && !scenario.catalog.empty()) {
            auto it = scenario.catalog.begin();
            std::advance(it, long(pick(rng, scenario.catalog.size())));
            auto price = it->second.commercial.find("price");
            if (price != it->second.commercial.end()) {
                q.criteria.attribute_equals["commercial.price"] = price->second;
            }
        }
        if (!q.criteria.category && !q.criteria.supplier && q.criteria.attribute_equals.empty() &&
            !q.criteria.made_after) {
            q.criteria.category = categories()[pick(rng, categories().size())];
        }

        try {
            SearchGoal goal{q.criteria, std::nullopt};
            resolve_targets(goal, scenario, q.home);
            return q;
        } catch (const Error&) {
            continue; // e.g. supplier nobody received from; redraw
        }
    }
    QueryRequest q;
    q.is_trace = false;
    q.home = firms.front();
    q.criteria.category = categories().front();
    q.ttl = 16;
    return q;
}

QueryRequest random_selective_search_query(const ScenarioData& scenario, std::mt19937_64& rng) {
    auto firms = scenario.firm_ids();
    for (int attempt = 0; attempt < 32; ++attempt) {
        QueryRequest q;
        q.is_trace = false;
        q.home = firms[pick(rng, firms.size())];
        q.ttl = 16;
        q.criteria.category = categories()[pick(rng, categories().size())];
        switch (pick(rng, 3)) {
        case 0:
            q.criteria.attribute_equals["material"] = materials()[pick(rng, materials().size())];
            break;
        case 1:
            q.criteria.attribute_equals["grade"] = "G" + std::to_string(1 + pick(rng, 4));
            break;
        default:
            q.criteria.supplier = firms[pick(rng, firms.size())];
            break;
        }
        if (pick(rng, 4) == 0) {
            Millis lo = 1'500'000'000'000LL + Millis(pick(rng, 100'000'000'000ULL));
            q.criteria.made_after = lo;
            q.criteria.made_before = lo + 100'000'000'000LL;
        }
        try {
            SearchGoal goal{q.criteria, std::nullopt};
            resolve_targets(goal, scenario, q.home);
            return q;
        } catch (const Error&) {
            continue;
        }
    }
    QueryRequest q;
    q.is_trace = false;
    q.home = firms.front();
    q.criteria.category = categories().front();
    q.criteria.attribute_equals["material"] = materials().front();
    q.ttl = 16;
    return q;
}

ScenarioData bench_scenario(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int n = 5;
    const int per_firm = 1000;
    const int selected_per_firm = 10; // 1% of each store

    Doc doc = Doc::object();
    std::vector<std::string> firms;
    for (int i = 0; i < n; ++i) firms.push_back(firm_name(i));

    std::map<std::string, std::map<std::string, std::string>> keys;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            std::string key = hex_key(rng);
            keys[firms[i]][firms[j]] = key;
            keys[firms[j]][firms[i]] = key;
        }
    }

    Doc firms_doc = Doc::array();
    for (int i = 0; i < n; ++i) {
        Doc f = Doc::object();
        f["id"] = firms[i];
        f["keys"] = keys[firms[i]];
        Doc trust = Doc::object();
        for (int j = 0; j < n; ++j) {
            if (i != j) trust[firms[j]] = "Known";
        }
        f["trust"] = trust;
        firms_doc.push_back(f);
    }
    doc["firms"] = firms_doc;

    Doc links_doc = Doc::array();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            links_doc.push_back(Doc::object({{"a", firms[i]}, {"b", firms[j]}, {"latency_ms", 50}}));
        }
    }
    doc["links"] = links_doc;

    Doc products_doc = Doc::array();
    Doc custody_doc = Doc::array();
    for (int i = 0; i < n; ++i) {
        for (int p = 0; p < per_firm; ++p) {
            char id[24];
            std::snprintf(id, sizeof(id), "P-%c-%04d", char('A' + i), p);
            Doc record = Doc::object();
            record["product"] = std::string(id);
            record["category"] =
                p < selected_per_firm ? "C-TARGET" : categories()[pick(rng, categories().size())];
            record["supplier"] = firms[std::size_t(i)];
            Millis made = 1'500'000'000'000LL + Millis(pick(rng, 200'000'000'000ULL));
            record["manufacture_date"] = made;
            Doc attrs = Doc::object();
            attrs["material"] = materials()[pick(rng, materials().size())];
            attrs["grade"] = "G" + std::to_string(1 + pick(rng, 4));
            attrs["lot"] = "L-" + std::to_string(1000 + pick(rng, 9000));
            attrs["desc"] = pseudo_text(rng, 180);
            record["attributes"] = attrs;
            Doc commercial = Doc::object();
            commercial["price"] = std::to_string(1 + pick(rng, 500)) + "." +
                                  std::to_string(10 + pick(rng, 90));
            commercial["contract"] = "CT-" + std::to_string(100 + pick(rng, 900));
            record["commercial"] = commercial;
            products_doc.push_back(record);

            Doc e = Doc::object();
            e["product"] = std::string(id);
            e["firm"] = firms[std::size_t(i)];
            e["received_at"] = made + 86'400'000;
            custody_doc.push_back(e);
        }
    }
    doc["products"] = products_doc;
    doc["custody"] = custody_doc;

    return ingest_scenario(doc);
}

QueryRequest bench_query(const ScenarioData& scenario) {
    QueryRequest q;
    q.is_trace = false;
    q.home = scenario.firm_ids().front();
    q.criteria.category = "C-TARGET";
    q.ttl = 16;
    return q;
}

} // namespace agentnet
