#include "kbits/bytes.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <stdexcept>

namespace kbits {

std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t len) {
    return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(len)));
}

std::array<std::uint8_t, 32> sha256(const std::uint8_t* data, std::size_t len) {
    std::array<std::uint8_t, 32> out{};
    unsigned int out_len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("sha256: EVP_MD_CTX_new failed");
    if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data, len) != 1 ||
        EVP_DigestFinal_ex(ctx, out.data(), &out_len) != 1 || out_len != 32) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256: digest failed");
    }
    EVP_MD_CTX_free(ctx);
    return out;
}

std::string hex(const std::uint8_t* data, std::size_t len) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(len * 2);
    for (std::size_t i = 0; i < len; ++i) {
        s.push_back(digits[data[i] >> 4]);
        s.push_back(digits[data[i] & 0xf]);
    }
    return s;
}

}  // namespace kbits
