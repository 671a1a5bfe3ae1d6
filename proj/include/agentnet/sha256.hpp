#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace agentnet {

using Digest32 = std::array<std::uint8_t, 32>;
using Key32 = std::array<std::uint8_t, 32>;

// Incremental SHA-256 (FIPS 180-4).
class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    Digest32 finish();

    static Digest32 hash(std::string_view data);

private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_{};
    std::array<std::uint8_t, 64> buffer_{};
    std::uint64_t total_len_ = 0;
    std::size_t buffer_len_ = 0;
};

// HMAC-SHA256 (RFC 2104) with a 32-byte key.
Digest32 hmac_sha256(const Key32& key, std::string_view data);
Digest32 hmac_sha256(const std::uint8_t* key, std::size_t key_len, const void* data, std::size_t len);

std::string to_hex(const std::uint8_t* data, std::size_t len);

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& a) {
    return to_hex(a.data(), N);
}

// Strict lowercase/uppercase hex of exactly out_len*2 chars.
bool from_hex(std::string_view hex, std::uint8_t* out, std::size_t out_len);

template <std::size_t N>
bool from_hex(std::string_view hex, std::array<std::uint8_t, N>& out) {
    return from_hex(hex, out.data(), N);
}

} // namespace agentnet
