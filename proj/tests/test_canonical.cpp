#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "agentnet/canonical.hpp"

using namespace agentnet;

namespace {

// Independent random document generator for the round-trip property.
Doc random_doc(std::mt19937_64& rng, int depth = 0) {
    std::uint64_t kind = rng() % (depth >= 3 ? 4 : 6);
    switch (kind) {
    case 0: return Doc(nullptr);
    case 1: return Doc(rng() % 2 == 0);
    case 2: return Doc(std::int64_t(rng()) >> (rng() % 32));
    case 3: {
        static const char* tokens[] = {"a", "b", " ", "\"", "\\", "\n", "\t",
                                       "{", "}", ":",  ",",  "0",  "\xc3\xa9"};
        std::string s;
        std::uint64_t len = rng() % 12;
        for (std::uint64_t i = 0; i < len; ++i) {
            s += tokens[rng() % 13]; // tokens keep the string valid UTF-8
        }
        return Doc(s);
    }
    case 4: {
        Doc arr = Doc::array();
        std::uint64_t len = rng() % 5;
        for (std::uint64_t i = 0; i < len; ++i) {
            arr.push_back(random_doc(rng, depth + 1));
        }
        return arr;
    }
    default: {
        Doc obj = Doc::object();
        std::uint64_t len = rng() % 5;
        for (std::uint64_t i = 0; i < len; ++i) {
            obj["k" + std::to_string(rng() % 16)] = random_doc(rng, depth + 1);
        }
        return obj;
    }
    }
}

} // namespace

TEST_CASE("sorted keys and no whitespace") {
    Doc d = Doc::object();
    d["b"] = 1;
    d["a"] = 2;
    CHECK(canonical_encode(d) == "{\"a\":2,\"b\":1}");
    CHECK(canonical_encode(Doc::object()) == "{}");
    CHECK(canonical_encode(Doc::array()) == "[]");
    CHECK(canonical_encode(Doc(nullptr)) == "null");
}

TEST_CASE("structurally equal documents encode identically") {
    auto a = parse_doc("{ \"x\": [1, 2, {\"z\": true, \"y\": null}], \"w\": \"s\" }");
    auto b = parse_doc("{\"w\":\"s\",\"x\":[1,2,{\"y\":null,\"z\":true}]}");
    REQUIRE(a);
    REQUIRE(b);
    CHECK(canonical_encode(*a) == canonical_encode(*b));
}

TEST_CASE("integers in decimal, signed and unsigned") {
    Doc d = Doc::object();
    d["neg"] = std::int64_t(-42);
    d["big"] = std::uint64_t(18446744073709551615ULL);
    CHECK(canonical_encode(d) == "{\"big\":18446744073709551615,\"neg\":-42}");
}

TEST_CASE("string escaping is fixed") {
    Doc d = Doc(std::string("a\"b\\c\nd\te\x01" "f"));
    CHECK(canonical_encode(d) == "\"a\\\"b\\\\c\\nd\\te\\u0001f\"");
}

TEST_CASE("non-representable nodes are rejected") {
    CHECK_THROWS_AS(canonical_encode(Doc(1.5)), Error);
    Doc nested = Doc::object();
    nested["x"] = Doc::array({1, Doc(0.25)});
    try {
        canonical_encode(nested);
        FAIL("expected EncodingUnsupported");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EncodingUnsupported);
    }
}

TEST_CASE("round-trip over 1000 random documents") {
    std::mt19937_64 rng(20240811);
    for (int i = 0; i < 1000; ++i) {
        Doc d = random_doc(rng);
        std::string bytes = canonical_encode(d);
        auto back = parse_doc(bytes);
        REQUIRE(back);
        CHECK(*back == d);
        // decode then re-encode reproduces the exact bytes
        CHECK(canonical_encode(*back) == bytes);
    }
}
