#include "agentnet/scenario.hpp"

#include <fstream>
#include <sstream>

namespace agentnet {

std::vector<FirmId> ScenarioData::firm_ids() const {
    std::vector<FirmId> out;
    out.reserve(configs.size());
    for (const auto& [id, cfg] : configs) {
        (void)cfg;
        out.push_back(id);
    }
    return out;
}

namespace {

[[noreturn]] void invalid(const std::string& message) {
    raise(Errc::ScenarioInvalid, message);
}

const Doc& require_array(const Doc& d, const char* key) {
    static const Doc empty = Doc::array();
    auto it = d.find(key);
    if (it == d.end()) {
        return empty;
    }
    if (!it->is_array()) {
        invalid(std::string("'") + key + "' must be an array");
    }
    return *it;
}

std::string firm_field(const Doc& d, const char* key, const char* what) {
    auto it = d.find(key);
    if (it == d.end() || !it->is_string() || !valid_firm_id(it->get<std::string>())) {
        invalid(std::string(what) + ": '" + key + "' must be a firm id");
    }
    return it->get<std::string>();
}

PlatformConfig parse_firm(const Doc& d) {
    if (!d.is_object()) {
        invalid("firm entries must be maps");
    }
    PlatformConfig cfg;
    cfg.firm = firm_field(d, "id", "firm");

    if (auto it = d.find("keys"); it != d.end()) {
        if (!it->is_object()) invalid("firm " + cfg.firm + ": keys must be a map");
        for (auto k = it->begin(); k != it->end(); ++k) {
            if (!valid_firm_id(k.key())) invalid("firm " + cfg.firm + ": key peer '" + k.key() + "'");
            Key32 key{};
            if (!k.value().is_string() || !from_hex(k.value().get<std::string>(), key)) {
                invalid("firm " + cfg.firm + ": key for " + k.key() + " must be 32 bytes hex");
            }
            if (k.key() == cfg.firm) invalid("firm " + cfg.firm + " keys itself");
            cfg.keys[k.key()] = key;
        }
    }
    if (auto it = d.find("trust"); it != d.end()) {
        if (!it->is_object()) invalid("firm " + cfg.firm + ": trust must be a map");
        for (auto t = it->begin(); t != it->end(); ++t) {
            if (t.key() == cfg.firm) invalid("firm " + cfg.firm + " must not be in its own trust map");
            auto level = t.value().is_string() ? trust_from_name(t.value().get<std::string>())
                                               : std::nullopt;
            if (!level) invalid("firm " + cfg.firm + ": unknown trust level for " + t.key());
            cfg.trust[t.key()] = *level;
        }
    }
    if (auto it = d.find("behavior_whitelist"); it != d.end()) {
        if (!it->is_array()) invalid("firm " + cfg.firm + ": behavior_whitelist must be an array");
        cfg.behavior_whitelist.clear();
        for (const auto& b : *it) {
            if (!b.is_string()) invalid("firm " + cfg.firm + ": behavior ids must be strings");
            cfg.behavior_whitelist.insert(b.get<std::string>());
        }
    }
    if (auto it = d.find("ttl_cap"); it != d.end()) {
        if (!it->is_number_integer()) invalid("firm " + cfg.firm + ": ttl_cap must be an integer");
        cfg.ttl_cap = it->get<std::int64_t>();
        if (cfg.ttl_cap <= 0 || cfg.ttl_cap > kMaxTtl) {
            invalid("firm " + cfg.firm + ": ttl_cap must be in (0, " + std::to_string(kMaxTtl) + "]");
        }
    }
    if (auto it = d.find("retry_backoff_ms"); it != d.end()) {
        if (!it->is_array() || it->empty()) {
            invalid("firm " + cfg.firm + ": retry_backoff_ms must be a non-empty array");
        }
        cfg.retry_backoff_ms.clear();
        for (const auto& b : *it) {
            if (!b.is_number_integer() || b.get<std::int64_t>() <= 0) {
                invalid("firm " + cfg.firm + ": backoff steps must be positive integers");
            }
            cfg.retry_backoff_ms.push_back(b.get<Millis>());
        }
    }
    if (auto it = d.find("host_port"); it != d.end()) {
        if (!it->is_string()) invalid("firm " + cfg.firm + ": host_port must be a string");
        cfg.host_port = it->get<std::string>();
    }
    return cfg;
}

SimLink parse_link(const Doc& d, const std::map<FirmId, PlatformConfig>& configs) {
    if (!d.is_object()) invalid("link entries must be maps");
    SimLink link;
    link.a = firm_field(d, "a", "link");
    link.b = firm_field(d, "b", "link");
    if (link.a == link.b) invalid("link " + link.a + "-" + link.b + " is a self-loop");
    for (const auto& end : {link.a, link.b}) {
        if (configs.find(end) == configs.end()) invalid("link references unknown firm " + end);
    }
    if (auto it = d.find("latency_ms"); it != d.end()) {
        if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
            invalid("link " + link.a + "-" + link.b + ": latency_ms must be a non-negative integer");
        }
        link.latency_ms = it->get<Millis>();
    }
    if (auto it = d.find("schedule"); it != d.end()) {
        if (!it->is_array()) invalid("link " + link.a + "-" + link.b + ": schedule must be an array");
        Millis prev = -1;
        for (const auto& s : *it) {
            if (!s.is_object() || !s.contains("from_ms") || !s["from_ms"].is_number_integer() ||
                !s.contains("up") || !s["up"].is_boolean()) {
                invalid("link " + link.a + "-" + link.b + ": schedule entries need from_ms and up");
            }
            ScheduleEntry entry{s["from_ms"].get<Millis>(), s["up"].get<bool>()};
            if (entry.from_ms <= prev) {
                invalid("link " + link.a + "-" + link.b + ": schedule times must be strictly increasing");
            }
            prev = entry.from_ms;
            link.schedule.push_back(entry);
        }
    }
    return link;
}

} // namespace

ScenarioData ingest_scenario(const Doc& document) {
    if (!document.is_object()) {
        invalid("scenario must be a map");
    }
    ScenarioData sc;

    for (const auto& f : require_array(document, "firms")) {
        PlatformConfig cfg = parse_firm(f);
        if (!sc.configs.emplace(cfg.firm, cfg).second) {
            invalid("duplicate firm id " + cfg.firm);
        }
    }
    if (sc.configs.empty()) {
        invalid("scenario declares no firms");
    }

    for (const auto& [id, cfg] : sc.configs) {
        for (const auto& [peer, key] : cfg.keys) {
            auto other = sc.configs.find(peer);
            if (other == sc.configs.end()) {
                invalid("firm " + id + " keys unknown peer " + peer);
            }
            auto back = other->second.keys.find(id);
            if (back == other->second.keys.end() || back->second != key) {
                invalid("pre-shared key between " + id + " and " + peer + " is not symmetric");
            }
        }
        for (const auto& [peer, level] : cfg.trust) {
            (void)level;
            if (sc.configs.find(peer) == sc.configs.end()) {
                invalid("firm " + id + " trusts unknown peer " + peer);
            }
        }
    }

    std::set<std::pair<FirmId, FirmId>> link_pairs;
    for (const auto& l : require_array(document, "links")) {
        SimLink link = parse_link(l, sc.configs);
        auto pair = std::minmax(link.a, link.b);
        if (!link_pairs.emplace(pair.first, pair.second).second) {
            invalid("duplicate link " + link.a + "-" + link.b);
        }
        sc.links.push_back(std::move(link));
    }

    for (const auto& p : require_array(document, "products")) {
        ProductRecord record;
        try {
            record = ProductRecord::from_doc(p);
        } catch (const Error& e) {
            invalid(e.what());
        }
        if (!record.supplier || !record.manufacture_date) {
            invalid("product " + record.product + " needs supplier and manufacture_date");
        }
        if (sc.configs.find(*record.supplier) == sc.configs.end()) {
            invalid("product " + record.product + " names unknown supplier " + *record.supplier);
        }
        if (!sc.catalog.emplace(record.product, record).second) {
            invalid("duplicate product id " + record.product);
        }
    }

    for (const auto& c : require_array(document, "custody")) {
        CustodyEvent event;
        try {
            event = CustodyEvent::from_doc(c);
        } catch (const Error& e) {
            invalid(e.what());
        }
        if (sc.catalog.find(event.product) == sc.catalog.end()) {
            invalid("custody event references unknown product " + event.product);
        }
        for (const auto& ref : {std::optional<FirmId>(event.firm), event.received_from, event.shipped_to}) {
            if (ref && sc.configs.find(*ref) == sc.configs.end()) {
                invalid("custody event for " + event.product + " references unknown firm " + *ref);
            }
        }
        sc.custody_by_product[event.product].push_back(event);
    }

    for (const auto& [id, cfg] : sc.configs) {
        (void)cfg;
        sc.stores[id] = FirmStore{id, {}, {}};
    }

    for (const auto& [product, record] : sc.catalog) {
        auto events = sc.custody_by_product.find(product);
        if (events == sc.custody_by_product.end()) {
            invalid("product " + product + " has no custody events, holder undefined");
        }
        std::vector<CustodyEvent> chain;
        try {
            chain = build_custody_chain(events->second);
        } catch (const Error& e) {
            invalid(std::string("product ") + product + ": " + e.what());
        }
        sc.directory[product] = chain.back().firm;
        for (const auto& e : chain) {
            FirmStore& store = sc.stores[e.firm];
            store.custody.push_back(e);
            store.products[product] = record;
            if (e.received_from) {
                sc.supplier_index[*record.supplier].insert(e.firm);
            }
        }
    }

    if (auto it = document.find("horizon_ms"); it != document.end()) {
        if (!it->is_number_integer() || it->get<std::int64_t>() <= 0) {
            invalid("horizon_ms must be a positive integer");
        }
        sc.horizon_ms = it->get<Millis>();
    }

    return sc;
}

ScenarioData ingest_scenario_text(std::string_view text) {
    auto doc = parse_doc(text);
    if (!doc) {
        invalid("scenario text is not a well-formed document");
    }
    return ingest_scenario(*doc);
}

ScenarioData ingest_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        invalid("cannot open scenario file " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_scenario_text(buf.str());
}

Doc scenario_to_doc(const ScenarioData& scenario) {
    Doc d = Doc::object();
    Doc firms = Doc::array();
    for (const auto& [id, cfg] : scenario.configs) {
        Doc f = Doc::object();
        f["id"] = id;
        Doc keys = Doc::object();
        for (const auto& [peer, key] : cfg.keys) keys[peer] = to_hex(key);
        f["keys"] = keys;
        Doc trust = Doc::object();
        for (const auto& [peer, level] : cfg.trust) trust[peer] = trust_name(level);
        f["trust"] = trust;
        f["behavior_whitelist"] = std::vector<std::string>(cfg.behavior_whitelist.begin(),
                                                           cfg.behavior_whitelist.end());
        f["ttl_cap"] = cfg.ttl_cap;
        f["retry_backoff_ms"] = cfg.retry_backoff_ms;
        if (!cfg.host_port.empty()) f["host_port"] = cfg.host_port;
        firms.push_back(f);
    }
    d["firms"] = firms;

    Doc links = Doc::array();
    for (const auto& link : scenario.links) {
        Doc l = Doc::object();
        l["a"] = link.a;
        l["b"] = link.b;
        l["latency_ms"] = link.latency_ms;
        Doc schedule = Doc::array();
        for (const auto& s : link.schedule) {
            schedule.push_back(Doc::object({{"from_ms", s.from_ms}, {"up", s.up}}));
        }
        l["schedule"] = schedule;
        links.push_back(l);
    }
    d["links"] = links;

    Doc products = Doc::array();
    for (const auto& [id, record] : scenario.catalog) {
        (void)id;
        products.push_back(record.to_doc());
    }
    d["products"] = products;

    Doc custody = Doc::array();
    for (const auto& [id, events] : scenario.custody_by_product) {
        (void)id;
        for (const auto& e : events) custody.push_back(e.to_doc());
    }
    d["custody"] = custody;
    d["horizon_ms"] = scenario.horizon_ms;
    return d;
}

} // namespace agentnet
