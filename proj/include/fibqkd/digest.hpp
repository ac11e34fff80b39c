#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

namespace fibqkd {

inline std::string to_hex(const unsigned char* data, std::size_t n) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0x0F]);
    }
    return out;
}

inline std::string sha256_hex(const void* data, std::size_t n) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data, n, md, &len, EVP_sha256(), nullptr) != 1) throw std::runtime_error("SHA-256 failed");
    return to_hex(md, len);
}

inline std::string sha256_hex(std::string_view s) { return sha256_hex(s.data(), s.size()); }

/// Bits packed most significant first; the final byte is zero padded.
inline std::vector<unsigned char> pack_bits(const std::vector<bool>& bits) {
    std::vector<unsigned char> out((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out[i / 8] |= static_cast<unsigned char>(0x80U >> (i % 8));
    return out;
}

inline std::string key_hex(const std::vector<bool>& bits) {
    const auto bytes = pack_bits(bits);
    return to_hex(bytes.data(), bytes.size());
}

/// Hash of the packed key with its bit length appended, so keys that differ
/// only in trailing padding do not collide.
inline std::string key_hash(const std::vector<bool>& bits) {
    auto bytes = pack_bits(bits);
    const std::uint64_t n = bits.size();
    for (int i = 7; i >= 0; --i) bytes.push_back(static_cast<unsigned char>(n >> (8 * i)));
    return sha256_hex(bytes.data(), bytes.size());
}

} // namespace fibqkd
