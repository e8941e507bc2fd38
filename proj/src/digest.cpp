#include "edgetrade/digest.hpp"

#include <sodium.h>

namespace edgetrade {

namespace {
const int kSodiumInit = sodium_init();
}  // namespace

std::string to_hex(ByteView b) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (auto c : b) {
        s.push_back(kHex[c >> 4]);
        s.push_back(kHex[c & 0xF]);
    }
    return s;
}

Digest sha256(ByteView data) {
    (void)kSodiumInit;
    Digest d{};
    crypto_hash_sha256(d.data(), data.data(), data.size());
    return d;
}

std::string to_hex(const Digest& d) { return to_hex(ByteView(d)); }

}  // namespace edgetrade
