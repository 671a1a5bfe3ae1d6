#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "agentnet/errors.hpp"

namespace agentnet {

// Structured documents are JSON trees of maps, arrays, strings, integers,
// booleans and null. nlohmann::json keeps object keys in std::map order,
// i.e. ascending by code point, which the canonical form relies on.
using Doc = nlohmann::json;

// Deterministic byte encoding: sorted object keys, no insignificant
// whitespace, integers in decimal, fixed string escaping. Equal documents
// always produce identical bytes. Throws EncodingUnsupported for nodes
// outside the value domain (floats, binary blobs).
std::string canonical_encode(const Doc& value);

// Parses bytes into a Doc; std::nullopt when the input is not well-formed.
std::optional<Doc> parse_doc(std::string_view bytes);

} // namespace agentnet
