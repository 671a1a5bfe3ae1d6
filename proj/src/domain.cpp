#include "agentnet/domain.hpp"

#include <algorithm>

namespace agentnet {

bool valid_firm_id(const std::string& s) {
    if (s.empty() || s.size() > 16) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    });
}

bool valid_product_id(const std::string& s) {
    if (s.empty() || s.size() > 64) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= 0x21 && c < 0x7f; });
}

AccessScope scope_for_trust(TrustLevel t) {
    switch (t) {
    case TrustLevel::Trusted: return AccessScope::Full;
    case TrustLevel::Known: return AccessScope::Standard;
    case TrustLevel::Unknown: break;
    }
    return AccessScope::Minimal;
}

const char* trust_name(TrustLevel t) {
    switch (t) {
    case TrustLevel::Trusted: return "Trusted";
    case TrustLevel::Known: return "Known";
    case TrustLevel::Unknown: break;
    }
    return "Unknown";
}

const char* scope_name(AccessScope s) {
    switch (s) {
    case AccessScope::Full: return "Full";
    case AccessScope::Standard: return "Standard";
    case AccessScope::Minimal: break;
    }
    return "Minimal";
}

std::optional<TrustLevel> trust_from_name(std::string_view name) {
    if (name == "Trusted") return TrustLevel::Trusted;
    if (name == "Known") return TrustLevel::Known;
    if (name == "Unknown") return TrustLevel::Unknown;
    return std::nullopt;
}

std::optional<AccessScope> scope_from_name(std::string_view name) {
    if (name == "Full") return AccessScope::Full;
    if (name == "Standard") return AccessScope::Standard;
    if (name == "Minimal") return AccessScope::Minimal;
    return std::nullopt;
}

namespace {

const Doc* find_field(const Doc& d, const char* key) {
    auto it = d.find(key);
    return it == d.end() || it->is_null() ? nullptr : &*it;
}

std::string require_string(const Doc& d, const char* key) {
    const Doc* f = find_field(d, key);
    if (!f || !f->is_string()) {
        raise(Errc::CapsuleMalformed, std::string("missing or non-string field '") + key + "'");
    }
    return f->get<std::string>();
}

Millis require_int(const Doc& d, const char* key) {
    const Doc* f = find_field(d, key);
    if (!f || !f->is_number_integer()) {
        raise(Errc::CapsuleMalformed, std::string("missing or non-integer field '") + key + "'");
    }
    return f->get<Millis>();
}

std::map<std::string, std::string> string_map(const Doc& d, const char* key) {
    std::map<std::string, std::string> out;
    const Doc* f = find_field(d, key);
    if (!f) {
        return out;
    }
    if (!f->is_object()) {
        raise(Errc::CapsuleMalformed, std::string("field '") + key + "' must be a map");
    }
    for (auto it = f->begin(); it != f->end(); ++it) {
        if (!it.value().is_string()) {
            raise(Errc::CapsuleMalformed, std::string("map '") + key + "' has a non-string value");
        }
        out[it.key()] = it.value().get<std::string>();
    }
    return out;
}

} // namespace

Doc ProductRecord::to_doc() const {
    Doc d = Doc::object();
    d["product"] = product;
    d["category"] = category;
    if (supplier) d["supplier"] = *supplier;
    if (manufacture_date) d["manufacture_date"] = *manufacture_date;
    if (!attributes.empty()) d["attributes"] = attributes;
    if (!commercial.empty()) d["commercial"] = commercial;
    return d;
}

ProductRecord ProductRecord::from_doc(const Doc& d) {
    if (!d.is_object()) {
        raise(Errc::CapsuleMalformed, "product record must be a map");
    }
    ProductRecord r;
    r.product = require_string(d, "product");
    r.category = require_string(d, "category");
    if (find_field(d, "supplier")) r.supplier = require_string(d, "supplier");
    if (find_field(d, "manufacture_date")) {
        r.manufacture_date = require_int(d, "manufacture_date");
        if (*r.manufacture_date < 0) {
            raise(Errc::CapsuleMalformed, "manufacture_date must be >= 0");
        }
    }
    r.attributes = string_map(d, "attributes");
    r.commercial = string_map(d, "commercial");
    if (!valid_product_id(r.product)) {
        raise(Errc::CapsuleMalformed, "invalid product id '" + r.product + "'");
    }
    return r;
}

Doc CustodyEvent::to_doc() const {
    Doc d = Doc::object();
    d["product"] = product;
    d["firm"] = firm;
    if (received_from) d["received_from"] = *received_from;
    d["received_at"] = received_at;
    if (shipped_to) d["shipped_to"] = *shipped_to;
    if (shipped_at) d["shipped_at"] = *shipped_at;
    return d;
}

CustodyEvent CustodyEvent::from_doc(const Doc& d) {
    if (!d.is_object()) {
        raise(Errc::CapsuleMalformed, "custody event must be a map");
    }
    CustodyEvent e;
    e.product = require_string(d, "product");
    e.firm = require_string(d, "firm");
    if (find_field(d, "received_from")) e.received_from = require_string(d, "received_from");
    e.received_at = require_int(d, "received_at");
    if (find_field(d, "shipped_to")) e.shipped_to = require_string(d, "shipped_to");
    if (find_field(d, "shipped_at")) e.shipped_at = require_int(d, "shipped_at");
    if (e.shipped_at && *e.shipped_at < e.received_at) {
        raise(Errc::CapsuleMalformed, "shipped_at before received_at for " + e.product + " at " + e.firm);
    }
    if (!valid_firm_id(e.firm)) {
        raise(Errc::CapsuleMalformed, "invalid firm id '" + e.firm + "'");
    }
    return e;
}

std::vector<CustodyEvent> build_custody_chain(std::vector<CustodyEvent> events) {
    if (events.empty()) {
        raise(Errc::ChainInconsistent, "no custody events, no origin");
    }
    const ProductId& product = events.front().product;
    for (const auto& e : events) {
        if (e.product != product) {
            raise(Errc::ChainInconsistent, "events mix products " + product + " and " + e.product);
        }
    }

    std::map<FirmId, const CustodyEvent*> by_firm;
    const CustodyEvent* origin = nullptr;
    for (const auto& e : events) {
        if (!by_firm.emplace(e.firm, &e).second) {
            raise(Errc::ChainInconsistent, "firm " + e.firm + " holds " + product + " more than once");
        }
        if (!e.received_from) {
            if (origin) {
                raise(Errc::ChainInconsistent, "multiple origins for " + product + ": " + origin->firm + " and " + e.firm);
            }
            origin = &e;
        }
    }
    if (!origin) {
        raise(Errc::ChainInconsistent, "no origin event for " + product);
    }

    std::vector<CustodyEvent> chain;
    chain.reserve(events.size());
    const CustodyEvent* cur = origin;
    while (true) {
        chain.push_back(*cur);
        if (!cur->shipped_to) {
            break;
        }
        auto it = by_firm.find(*cur->shipped_to);
        if (it == by_firm.end()) {
            raise(Errc::ChainInconsistent,
                  "broken link for " + product + ": " + cur->firm + " shipped to " + *cur->shipped_to +
                      " which has no event");
        }
        const CustodyEvent* next = it->second;
        if (!next->received_from || *next->received_from != cur->firm) {
            raise(Errc::ChainInconsistent,
                  "mismatched link for " + product + ": " + next->firm + " did not receive from " + cur->firm);
        }
        if (chain.size() > events.size()) {
            raise(Errc::ChainInconsistent, "cycle while walking chain of " + product);
        }
        cur = next;
    }
    if (chain.size() != events.size()) {
        raise(Errc::ChainInconsistent,
              "fork or disconnected events for " + product + ": walked " + std::to_string(chain.size()) +
                  " of " + std::to_string(events.size()));
    }
    return chain;
}

} // namespace agentnet
