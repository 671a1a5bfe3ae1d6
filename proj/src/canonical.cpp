#include "agentnet/canonical.hpp"

namespace agentnet {

namespace {

void encode_string(const std::string& s, std::string& out) {
    static const char* digits = "0123456789abcdef";
    out.push_back('"');
    for (unsigned char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\b': out += "\\b"; break;
        case '\f': out += "\\f"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (c < 0x20) {
                out += "\\u00";
                out.push_back(digits[c >> 4]);
                out.push_back(digits[c & 0x0f]);
            } else {
                out.push_back(char(c));
            }
        }
    }
    out.push_back('"');
}

void encode_value(const Doc& v, std::string& out) {
    switch (v.type()) {
    case Doc::value_t::null:
        out += "null";
        break;
    case Doc::value_t::boolean:
        out += v.get<bool>() ? "true" : "false";
        break;
    case Doc::value_t::number_integer:
        out += std::to_string(v.get<std::int64_t>());
        break;
    case Doc::value_t::number_unsigned:
        out += std::to_string(v.get<std::uint64_t>());
        break;
    case Doc::value_t::string:
        encode_string(v.get_ref<const std::string&>(), out);
        break;
    case Doc::value_t::array: {
        out.push_back('[');
        bool first = true;
        for (const auto& item : v) {
            if (!first) out.push_back(',');
            first = false;
            encode_value(item, out);
        }
        out.push_back(']');
        break;
    }
    case Doc::value_t::object: {
        // nlohmann object iteration is already ascending by key.
        out.push_back('{');
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (!first) out.push_back(',');
            first = false;
            encode_string(it.key(), out);
            out.push_back(':');
            encode_value(it.value(), out);
        }
        out.push_back('}');
        break;
    }
    default:
        raise(Errc::EncodingUnsupported, "node type " + std::string(v.type_name()) +
                                             " has no canonical form");
    }
}

} // namespace

std::string canonical_encode(const Doc& value) {
    std::string out;
    encode_value(value, out);
    return out;
}

std::optional<Doc> parse_doc(std::string_view bytes) {
    Doc d = Doc::parse(bytes, nullptr, false);
    if (d.is_discarded()) {
        return std::nullopt;
    }
    return d;
}

} // namespace agentnet
