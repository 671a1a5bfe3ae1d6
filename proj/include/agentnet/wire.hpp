#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "agentnet/domain.hpp"
#include "agentnet/sha256.hpp"

namespace agentnet {

enum class MsgType : std::uint8_t {
    Hello = 0x01,
    Transfer = 0x02,
    Ack = 0x03,
    Reject = 0x04,
    Result = 0x05,
};

const char* msg_type_name(MsgType t);

inline constexpr std::uint8_t kFrameMagic0 = 0x41; // 'A'
inline constexpr std::uint8_t kFrameMagic1 = 0x47; // 'G'
inline constexpr std::uint8_t kFrameVersion = 0x01;
inline constexpr std::size_t kFrameHeaderLen = 8;
inline constexpr std::size_t kFrameTagLen = 32;
inline constexpr std::uint64_t kMaxPayloadLen = 1u << 24;

struct Frame {
    MsgType msg_type = MsgType::Hello;
    FirmId sender; // contextual (link direction or session); not on the wire
    std::string payload;
};

// Layout: magic 0x41 0x47, version, msg_type, payload length (4-byte
// big-endian), payload, 32-byte HMAC-SHA256 tag over header+payload.
std::string encode_frame(MsgType type, std::string_view payload, const Key32& key);

// Strict inverse. Throws BadMagic / BadVersion / LengthMismatch / BadTag.
Frame decode_frame(std::string_view bytes, const Key32& key);

// Header-only peek for sessions that learn the sender from a HELLO payload
// before they can pick the verification key. Performs every structural
// check except the tag.
Frame peek_frame(std::string_view bytes);

} // namespace agentnet
