#pragma once

#include "agentnet/domain.hpp"

namespace agentnet {

// Conjunctive search criteria. attribute_equals keys address the attributes
// map; keys prefixed "commercial." address the commercial map instead.
struct QueryCriteria {
    std::optional<std::string> category;
    std::optional<FirmId> supplier;
    std::optional<Millis> made_after;  // inclusive lower bound
    std::optional<Millis> made_before; // inclusive upper bound
    std::map<std::string, std::string> attribute_equals;

    bool operator==(const QueryCriteria&) const = default;

    bool references_commercial() const;
    // BadRequest when made_after > made_before.
    void validate() const;

    Doc to_doc() const;
    static QueryCriteria from_doc(const Doc& d);
};

inline constexpr const char* kCommercialKeyPrefix = "commercial.";

// Per-firm database: the firm's product rows plus its own custody events.
struct FirmStore {
    FirmId firm;
    std::map<ProductId, ProductRecord> products;
    std::vector<CustodyEvent> custody;
};

// Full -> identity; Standard -> commercial stripped; Minimal -> only product
// id and category retained.
ProductRecord apply_scope(const ProductRecord& record, AccessScope scope);

// Criteria match against a (possibly redacted) record. A conjunct whose
// field was redacted away counts as unsatisfied.
bool matches(const ProductRecord& record, const QueryCriteria& criteria);

// Records satisfying every present conjunct, redacted per scope, ascending
// ProductId. Throws ScopeDenied for Minimal scope with commercial criteria.
std::vector<ProductRecord> query_products(const FirmStore& store, const QueryCriteria& criteria,
                                          AccessScope scope);

struct CustodyLookup {
    std::vector<CustodyEvent> events;     // this firm's events, earliest first
    std::optional<FirmId> predecessor;    // absent iff this firm is the origin
};

// Custody requires at least Standard scope. Throws NotHeld when the firm has
// no event for the product, ScopeDenied under Minimal scope.
CustodyLookup custody_lookup(const FirmStore& store, const ProductId& product, AccessScope scope);

} // namespace agentnet
