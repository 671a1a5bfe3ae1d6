#include "agentnet/wire.hpp"

#include <cstring>

namespace agentnet {

const char* msg_type_name(MsgType t) {
    switch (t) {
    case MsgType::Hello: return "HELLO";
    case MsgType::Transfer: return "TRANSFER";
    case MsgType::Ack: return "ACK";
    case MsgType::Reject: return "REJECT";
    case MsgType::Result: break;
    }
    return "RESULT";
}

std::string encode_frame(MsgType type, std::string_view payload, const Key32& key) {
    if (payload.size() > kMaxPayloadLen) {
        raise(Errc::PayloadTooLarge,
              "payload of " + std::to_string(payload.size()) + " bytes exceeds 2^24");
    }
    std::string out;
    out.reserve(kFrameHeaderLen + payload.size() + kFrameTagLen);
    out.push_back(char(kFrameMagic0));
    out.push_back(char(kFrameMagic1));
    out.push_back(char(kFrameVersion));
    out.push_back(char(static_cast<std::uint8_t>(type)));
    std::uint32_t len = static_cast<std::uint32_t>(payload.size());
    out.push_back(char(len >> 24));
    out.push_back(char((len >> 16) & 0xff));
    out.push_back(char((len >> 8) & 0xff));
    out.push_back(char(len & 0xff));
    out.append(payload);
    Digest32 tag = hmac_sha256(key.data(), key.size(), out.data(), out.size());
    out.append(reinterpret_cast<const char*>(tag.data()), tag.size());
    return out;
}

namespace {

Frame decode_impl(std::string_view bytes, const Key32* key) {
    if (bytes.size() < kFrameHeaderLen + kFrameTagLen) {
        raise(Errc::LengthMismatch, "frame shorter than header plus tag");
    }
    const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
    if (p[0] != kFrameMagic0 || p[1] != kFrameMagic1) {
        raise(Errc::BadMagic, "frame does not start with the protocol magic");
    }
    if (p[2] != kFrameVersion) {
        raise(Errc::BadVersion, "unsupported protocol version " + std::to_string(p[2]));
    }
    if (p[3] < 0x01 || p[3] > 0x05) {
        raise(Errc::BadVersion, "unknown message type " + std::to_string(p[3]));
    }
    std::uint32_t len = (std::uint32_t(p[4]) << 24) | (std::uint32_t(p[5]) << 16) |
                        (std::uint32_t(p[6]) << 8) | std::uint32_t(p[7]);
    if (bytes.size() != kFrameHeaderLen + len + kFrameTagLen) {
        raise(Errc::LengthMismatch, "declared payload length " + std::to_string(len) +
                                        " does not match frame size " + std::to_string(bytes.size()));
    }
    if (key) {
        Digest32 tag = hmac_sha256(key->data(), key->size(), bytes.data(), kFrameHeaderLen + len);
        if (std::memcmp(tag.data(), bytes.data() + kFrameHeaderLen + len, kFrameTagLen) != 0) {
            raise(Errc::BadTag, "authentication tag does not verify");
        }
    }
    Frame f;
    f.msg_type = static_cast<MsgType>(p[3]);
    f.payload.assign(bytes.data() + kFrameHeaderLen, len);
    return f;
}

} // namespace

Frame decode_frame(std::string_view bytes, const Key32& key) {
    return decode_impl(bytes, &key);
}

Frame peek_frame(std::string_view bytes) {
    return decode_impl(bytes, nullptr);
}

} // namespace agentnet
