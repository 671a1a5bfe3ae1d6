#include "agentnet/firmstore.hpp"

#include <algorithm>

namespace agentnet {

bool QueryCriteria::references_commercial() const {
    for (const auto& [key, value] : attribute_equals) {
        (void)value;
        if (key.rfind(kCommercialKeyPrefix, 0) == 0) {
            return true;
        }
    }
    return false;
}

void QueryCriteria::validate() const {
    if (made_after && made_before && *made_after > *made_before) {
        raise(Errc::BadRequest, "made_after is later than made_before");
    }
}

Doc QueryCriteria::to_doc() const {
    Doc d = Doc::object();
    if (category) d["category"] = *category;
    if (supplier) d["supplier"] = *supplier;
    if (made_after) d["made_after"] = *made_after;
    if (made_before) d["made_before"] = *made_before;
    if (!attribute_equals.empty()) d["attribute_equals"] = attribute_equals;
    return d;
}

QueryCriteria QueryCriteria::from_doc(const Doc& d) {
    if (!d.is_object()) {
        raise(Errc::CapsuleMalformed, "criteria must be a map");
    }
    QueryCriteria c;
    if (auto it = d.find("category"); it != d.end() && !it->is_null()) {
        if (!it->is_string()) raise(Errc::CapsuleMalformed, "criteria category must be a string");
        c.category = it->get<std::string>();
    }
    if (auto it = d.find("supplier"); it != d.end() && !it->is_null()) {
        if (!it->is_string()) raise(Errc::CapsuleMalformed, "criteria supplier must be a string");
        c.supplier = it->get<std::string>();
    }
    if (auto it = d.find("made_after"); it != d.end() && !it->is_null()) {
        if (!it->is_number_integer()) raise(Errc::CapsuleMalformed, "made_after must be an integer");
        c.made_after = it->get<Millis>();
    }
    if (auto it = d.find("made_before"); it != d.end() && !it->is_null()) {
        if (!it->is_number_integer()) raise(Errc::CapsuleMalformed, "made_before must be an integer");
        c.made_before = it->get<Millis>();
    }
    if (auto it = d.find("attribute_equals"); it != d.end() && !it->is_null()) {
        if (!it->is_object()) raise(Errc::CapsuleMalformed, "attribute_equals must be a map");
        for (auto f = it->begin(); f != it->end(); ++f) {
            if (!f.value().is_string()) {
                raise(Errc::CapsuleMalformed, "attribute_equals values must be strings");
            }
            c.attribute_equals[f.key()] = f.value().get<std::string>();
        }
    }
    return c;
}

ProductRecord apply_scope(const ProductRecord& record, AccessScope scope) {
    switch (scope) {
    case AccessScope::Full:
        return record;
    case AccessScope::Standard: {
        ProductRecord r = record;
        r.commercial.clear();
        return r;
    }
    case AccessScope::Minimal:
        break;
    }
    ProductRecord r;
    r.product = record.product;
    r.category = record.category;
    return r;
}

bool matches(const ProductRecord& record, const QueryCriteria& criteria) {
    if (criteria.category && record.category != *criteria.category) {
        return false;
    }
    if (criteria.supplier) {
        if (!record.supplier || *record.supplier != *criteria.supplier) {
            return false;
        }
    }
    if (criteria.made_after) {
        if (!record.manufacture_date || *record.manufacture_date < *criteria.made_after) {
            return false;
        }
    }
    if (criteria.made_before) {
        if (!record.manufacture_date || *record.manufacture_date > *criteria.made_before) {
            return false;
        }
    }
    for (const auto& [key, want] : criteria.attribute_equals) {
        if (key.rfind(kCommercialKeyPrefix, 0) == 0) {
            auto it = record.commercial.find(key.substr(std::string(kCommercialKeyPrefix).size()));
            if (it == record.commercial.end() || it->second != want) {
                return false;
            }
        } else {
            auto it = record.attributes.find(key);
            if (it == record.attributes.end() || it->second != want) {
                return false;
            }
        }
    }
    return true;
}

std::vector<ProductRecord> query_products(const FirmStore& store, const QueryCriteria& criteria,
                                          AccessScope scope) {
    criteria.validate();
    if (scope == AccessScope::Minimal && criteria.references_commercial()) {
        raise(Errc::ScopeDenied, "commercial criteria require more than Minimal scope");
    }
    std::vector<ProductRecord> out;
    for (const auto& [id, record] : store.products) { // map order = ascending ProductId
        (void)id;
        if (matches(record, criteria)) {
            out.push_back(apply_scope(record, scope));
        }
    }
    return out;
}

CustodyLookup custody_lookup(const FirmStore& store, const ProductId& product, AccessScope scope) {
    if (scope == AccessScope::Minimal) {
        raise(Errc::ScopeDenied, "custody requires Standard or Full scope");
    }
    CustodyLookup out;
    for (const auto& e : store.custody) {
        if (e.product == product) {
            out.events.push_back(e);
        }
    }
    if (out.events.empty()) {
        raise(Errc::NotHeld, store.firm + " has no custody event for " + product);
    }
    std::stable_sort(out.events.begin(), out.events.end(),
                     [](const CustodyEvent& a, const CustodyEvent& b) { return a.received_at < b.received_at; });
    out.predecessor = out.events.front().received_from;
    return out;
}

} // namespace agentnet
