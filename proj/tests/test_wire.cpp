#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "agentnet/simnet.hpp"
#include "agentnet/wire.hpp"
#include "helpers.hpp"

using namespace agentnet;
using namespace agentnet::testing;

TEST_CASE("HELLO frame with empty-map payload, exact bytes") {
    Key32 key = s1_key_ab();
    std::string frame = encode_frame(MsgType::Hello, "{}", key);
    REQUIRE(frame.size() == 42); // 8 + 2 + 32

    const std::uint8_t expected_head[] = {0x41, 0x47, 0x01, 0x01, 0x00, 0x00, 0x00, 0x02, 0x7B, 0x7D};
    for (std::size_t i = 0; i < sizeof(expected_head); ++i) {
        CHECK(std::uint8_t(frame[i]) == expected_head[i]);
    }
    // reference HMAC-SHA256 over header+payload with the scenario A-B key
    CHECK(to_hex(reinterpret_cast<const std::uint8_t*>(frame.data()) + 10, 32) ==
          "a04654d83582205cff53cd072c564d300bf66f17c99b4e234f26c5cdeb571760");
}

TEST_CASE("frame length arithmetic") {
    Key32 key = s1_key_ab();
    std::string payload(100, 'x');
    CHECK(encode_frame(MsgType::Transfer, payload, key).size() == 140); // 8 + 100 + 32
}

TEST_CASE("payload size boundary") {
    Key32 key = s1_key_ab();
    std::string at_limit(std::size_t(kMaxPayloadLen), 'x');
    CHECK(encode_frame(MsgType::Transfer, at_limit, key).size() ==
          kFrameHeaderLen + kMaxPayloadLen + kFrameTagLen);
    std::string over(std::size_t(kMaxPayloadLen) + 1, 'x');
    try {
        encode_frame(MsgType::Transfer, over, key);
        FAIL("expected PayloadTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::PayloadTooLarge);
    }
}

TEST_CASE("decode errors are distinct") {
    Key32 key = s1_key_ab();
    std::string good = encode_frame(MsgType::Ack, "{\"x\":1}", key);

    auto code_of = [&](std::string bytes) {
        try {
            decode_frame(bytes, key);
            return Errc::BadRequest; // no error
        } catch (const Error& e) {
            return e.code();
        }
    };

    CHECK(code_of(good) == Errc::BadRequest); // decodes fine

    std::string bad_magic = good;
    bad_magic[0] = 'X';
    CHECK(code_of(bad_magic) == Errc::BadMagic);

    std::string bad_version = good;
    bad_version[2] = 0x02;
    CHECK(code_of(bad_version) == Errc::BadVersion);

    std::string bad_type = good;
    bad_type[3] = 0x09;
    CHECK(code_of(bad_type) == Errc::BadVersion);

    std::string truncated = good.substr(0, good.size() - 10);
    CHECK(code_of(truncated) == Errc::LengthMismatch);

    std::string tag_flip = good;
    tag_flip.back() = char(tag_flip.back() ^ 0x01);
    CHECK(code_of(tag_flip) == Errc::BadTag);

    std::string payload_flip = good;
    payload_flip[9] = char(payload_flip[9] ^ 0x01);
    CHECK(code_of(payload_flip) == Errc::BadTag);

    CHECK(code_of("") == Errc::LengthMismatch);
}

TEST_CASE("encode/decode round-trip over random frames") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 1000; ++i) {
        Key32 key{};
        for (auto& b : key) b = std::uint8_t(rng());
        MsgType type = static_cast<MsgType>(1 + rng() % 5);
        std::string payload;
        std::size_t len = rng() % 300;
        for (std::size_t j = 0; j < len; ++j) payload.push_back(char(rng()));
        std::string bytes = encode_frame(type, payload, key);
        Frame back = decode_frame(bytes, key);
        CHECK(back.msg_type == type);
        CHECK(back.payload == payload);
    }
}

TEST_CASE("link_send counts bytes only when up") {
    SimLink link{"A", "B", 50, {}, 0, 0};
    VirtualClock clock{100};

    auto outcome = link_send(link, "A", std::string(120, 'x'), clock);
    CHECK(std::get<Delivered>(outcome).at_ms == 150);
    CHECK(link.bytes_a_to_b == 120);
    CHECK(link.bytes_b_to_a == 0);

    // three more frames of 100 bytes each: additive counters
    for (int i = 0; i < 3; ++i) {
        link_send(link, "B", std::string(100, 'y'), clock);
    }
    CHECK(link.bytes_b_to_a == 300);

    link.schedule = {{0, false}, {1000, true}};
    VirtualClock down{500};
    CHECK(std::holds_alternative<Down>(link_send(link, "A", "zz", down)));
    CHECK(link.bytes_a_to_b == 120); // unchanged

    VirtualClock up{1000};
    CHECK(std::holds_alternative<Delivered>(link_send(link, "A", "zz", up)));
}

TEST_CASE("schedule interpretation") {
    SimLink link{"A", "B", 1, {{100, false}, {200, true}, {300, false}}, 0, 0};
    CHECK(link.up_at(0));
    CHECK(link.up_at(99));
    CHECK_FALSE(link.up_at(100));
    CHECK_FALSE(link.up_at(199));
    CHECK(link.up_at(200));
    CHECK_FALSE(link.up_at(300));
    CHECK_FALSE(link.up_at(10000));
    CHECK(link.next_up_at(0) == 0);
    CHECK(link.next_up_at(150) == 200);
    CHECK_FALSE(link.next_up_at(350).has_value());
}

TEST_CASE("event queue pops by time then insertion order") {
    EventQueue q;
    VirtualClock clock;
    std::vector<int> order;
    q.schedule(10, [&] { order.push_back(1); });
    q.schedule(10, [&] { order.push_back(2); });
    q.schedule(20, [&] { order.push_back(3); });
    q.schedule(5, [&] { order.push_back(0); });
    while (!q.empty()) {
        q.run_next(clock);
    }
    CHECK(order == std::vector<int>{0, 1, 2, 3});
    CHECK(clock.now_ms == 20);

    try {
        q.run_next(clock);
        FAIL("expected QueueEmpty");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::QueueEmpty);
    }
}

TEST_CASE("events scheduled during execution run in order") {
    EventQueue q;
    VirtualClock clock;
    std::vector<std::string> order;
    q.schedule(10, [&] {
        order.push_back("a");
        q.schedule(10, [&] { order.push_back("nested-same-time"); });
        q.schedule(5, [&] { order.push_back("nested-past"); }); // runs immediately after, clock stays monotone
    });
    q.schedule(15, [&] { order.push_back("b"); });
    while (!q.empty()) {
        q.run_next(clock);
    }
    CHECK(order == std::vector<std::string>{"a", "nested-past", "nested-same-time", "b"});
    CHECK(clock.now_ms == 15);
}
