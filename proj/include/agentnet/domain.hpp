#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentnet/canonical.hpp"

namespace agentnet {

using FirmId = std::string;    // 1-16 chars, uppercase alphanumeric
using ProductId = std::string; // printable ASCII, e.g. "P-100"
using Millis = std::int64_t;   // integer milliseconds (UTC or virtual clock)

bool valid_firm_id(const std::string& s);
bool valid_product_id(const std::string& s);

enum class TrustLevel { Unknown = 0, Known = 1, Trusted = 2 };
enum class AccessScope { Minimal = 0, Standard = 1, Full = 2 };

// Trusted -> Full, Known -> Standard, Unknown -> Minimal.
AccessScope scope_for_trust(TrustLevel t);

const char* trust_name(TrustLevel t);
const char* scope_name(AccessScope s);
std::optional<TrustLevel> trust_from_name(std::string_view name);
std::optional<AccessScope> scope_from_name(std::string_view name);

// One firm's product row. supplier/manufacture_date/attributes/commercial
// may be stripped by scope redaction; a full record always carries them.
struct ProductRecord {
    ProductId product;
    std::string category;
    std::optional<FirmId> supplier;
    std::optional<Millis> manufacture_date;
    std::map<std::string, std::string> attributes;
    std::map<std::string, std::string> commercial; // scope-restricted fields

    bool operator==(const ProductRecord&) const = default;

    Doc to_doc() const;
    static ProductRecord from_doc(const Doc& d);
};

// One firm's custody interval for a product. received_from absent = origin
// (registration firm); shipped_to absent = current holder.
struct CustodyEvent {
    ProductId product;
    FirmId firm;
    std::optional<FirmId> received_from;
    Millis received_at = 0;
    std::optional<FirmId> shipped_to;
    std::optional<Millis> shipped_at;

    bool operator==(const CustodyEvent&) const = default;

    Doc to_doc() const;
    static CustodyEvent from_doc(const Doc& d);
};

// Orders one product's custody events into the unique linear chain, origin
// first. Throws ChainInconsistent when there is no origin, more than one,
// a broken or mismatched link, a fork, or a firm holding the product twice.
std::vector<CustodyEvent> build_custody_chain(std::vector<CustodyEvent> events);

} // namespace agentnet
