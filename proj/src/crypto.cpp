#include "edgetrade/crypto.hpp"

#include <sodium.h>

#include <algorithm>
#include <stdexcept>
#include <string>

#include "edgetrade/digest.hpp"

namespace edgetrade {

namespace {

ByteView tag_bytes(std::string_view s) { return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}; }

Digest tagged_hash(std::string_view tag, ByteView a, ByteView b = {}) {
    ByteWriter w;
    w.raw(tag_bytes(tag)).raw(a).raw(b);
    return sha256(w.bytes());
}

PublicKey toy_public(const PrivateKey& priv) {
    auto d = tagged_hash("toy/pub", priv.bytes);
    return PublicKey{Bytes(d.begin(), d.end())};
}

Bytes toy_stream_xor(const PublicKey& pub, ByteView in) {
    Bytes out(in.begin(), in.end());
    for (std::size_t block = 0; block * 32 < out.size(); ++block) {
        ByteWriter ctr;
        ctr.u64(block);
        const auto ks = tagged_hash("toy/enc", pub.bytes, ctr.bytes());
        for (std::size_t i = 0; i < 32 && block * 32 + i < out.size(); ++i) out[block * 32 + i] ^= ks[i];
    }
    return out;
}

constexpr std::size_t kToyTagLen = 16;

void ensure_sodium() {
    if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialize");
}

}  // namespace

KeyPair ToyScheme::keygen(std::uint64_t seed) const {
    ByteWriter w;
    w.u64(seed);
    const auto d = tagged_hash("toy/priv", w.bytes());
    KeyPair kp;
    kp.priv.bytes.assign(d.begin(), d.end());
    kp.pub = toy_public(kp.priv);
    return kp;
}

Bytes ToyScheme::encrypt(const PublicKey& to, ByteView plain) const {
    const auto tag = tagged_hash("toy/tag", to.bytes, plain);
    Bytes out(tag.begin(), tag.begin() + kToyTagLen);
    const auto body = toy_stream_xor(to, plain);
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

std::optional<Bytes> ToyScheme::decrypt(const PrivateKey& key, ByteView cipher) const {
    if (cipher.size() < kToyTagLen) return std::nullopt;
    const auto pub = toy_public(key);
    auto plain = toy_stream_xor(pub, cipher.subspan(kToyTagLen));
    const auto tag = tagged_hash("toy/tag", pub.bytes, plain);
    if (!std::equal(tag.begin(), tag.begin() + kToyTagLen, cipher.begin())) return std::nullopt;
    return plain;
}

Bytes ToyScheme::sign(const PrivateKey& key, ByteView msg) const {
    const auto d = tagged_hash("toy/sig", toy_public(key).bytes, msg);
    return Bytes(d.begin(), d.end());
}

bool ToyScheme::verify(const PublicKey& key, ByteView msg, ByteView sig) const {
    const auto d = tagged_hash("toy/sig", key.bytes, msg);
    return sig.size() == d.size() && std::equal(d.begin(), d.end(), sig.begin());
}

SodiumScheme::SodiumScheme() { ensure_sodium(); }

KeyPair SodiumScheme::keygen(std::uint64_t) const {
    KeyPair kp;
    kp.pub.bytes.resize(crypto_sign_PUBLICKEYBYTES);
    kp.priv.bytes.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_keypair(kp.pub.bytes.data(), kp.priv.bytes.data());
    return kp;
}

Bytes SodiumScheme::encrypt(const PublicKey& to, ByteView plain) const {
    if (to.bytes.size() != crypto_sign_PUBLICKEYBYTES) throw std::invalid_argument("bad public key size");
    std::uint8_t curve_pk[crypto_box_PUBLICKEYBYTES];
    if (crypto_sign_ed25519_pk_to_curve25519(curve_pk, to.bytes.data()) != 0)
        throw std::invalid_argument("public key is not a valid Ed25519 point");
    Bytes out(plain.size() + crypto_box_SEALBYTES);
    crypto_box_seal(out.data(), plain.data(), plain.size(), curve_pk);
    return out;
}

std::optional<Bytes> SodiumScheme::decrypt(const PrivateKey& key, ByteView cipher) const {
    if (key.bytes.size() != crypto_sign_SECRETKEYBYTES || cipher.size() < crypto_box_SEALBYTES)
        return std::nullopt;
    std::uint8_t curve_sk[crypto_box_SECRETKEYBYTES];
    std::uint8_t curve_pk[crypto_box_PUBLICKEYBYTES];
    crypto_sign_ed25519_sk_to_curve25519(curve_sk, key.bytes.data());
    if (crypto_sign_ed25519_pk_to_curve25519(curve_pk, key.bytes.data() + 32) != 0) return std::nullopt;
    Bytes out(cipher.size() - crypto_box_SEALBYTES);
    const int rc = crypto_box_seal_open(out.data(), cipher.data(), cipher.size(), curve_pk, curve_sk);
    sodium_memzero(curve_sk, sizeof curve_sk);
    if (rc != 0) return std::nullopt;
    return out;
}

Bytes SodiumScheme::sign(const PrivateKey& key, ByteView msg) const {
    if (key.bytes.size() != crypto_sign_SECRETKEYBYTES) throw std::invalid_argument("bad private key size");
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), key.bytes.data());
    return sig;
}

bool SodiumScheme::verify(const PublicKey& key, ByteView msg, ByteView sig) const {
    if (key.bytes.size() != crypto_sign_PUBLICKEYBYTES || sig.size() != crypto_sign_BYTES) return false;
    return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), key.bytes.data()) == 0;
}

std::unique_ptr<CryptoScheme> make_scheme(std::string_view name) {
    if (name == "toy") return std::make_unique<ToyScheme>();
    if (name == "sodium") return std::make_unique<SodiumScheme>();
    throw std::invalid_argument("unknown crypto scheme '" + std::string(name) + "'");
}

Bytes seal_symmetric(ByteView key, ByteView plain, ByteView associated) {
    ensure_sodium();
    if (key.size() != crypto_aead_xchacha20poly1305_ietf_KEYBYTES)
        throw std::invalid_argument("symmetric key must be 32 bytes");
    const auto nonce = tagged_hash("chunk/nonce", key);
    Bytes out(plain.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
    unsigned long long out_len = 0;
    crypto_aead_xchacha20poly1305_ietf_encrypt(out.data(), &out_len, plain.data(), plain.size(),
                                               associated.data(), associated.size(), nullptr, nonce.data(),
                                               key.data());
    out.resize(out_len);
    return out;
}

std::optional<Bytes> open_symmetric(ByteView key, ByteView cipher, ByteView associated) {
    ensure_sodium();
    if (key.size() != crypto_aead_xchacha20poly1305_ietf_KEYBYTES ||
        cipher.size() < crypto_aead_xchacha20poly1305_ietf_ABYTES)
        return std::nullopt;
    const auto nonce = tagged_hash("chunk/nonce", key);
    Bytes out(cipher.size());
    unsigned long long out_len = 0;
    if (crypto_aead_xchacha20poly1305_ietf_decrypt(out.data(), &out_len, nullptr, cipher.data(), cipher.size(),
                                                   associated.data(), associated.size(), nonce.data(),
                                                   key.data()) != 0)
        return std::nullopt;
    out.resize(out_len);
    return out;
}

Bytes hmac_sha256(ByteView key, ByteView msg) {
    ensure_sodium();
    crypto_auth_hmacsha256_state st;
    crypto_auth_hmacsha256_init(&st, key.data(), key.size());
    crypto_auth_hmacsha256_update(&st, msg.data(), msg.size());
    Bytes out(crypto_auth_hmacsha256_BYTES);
    crypto_auth_hmacsha256_final(&st, out.data());
    return out;
}

}  // namespace edgetrade
