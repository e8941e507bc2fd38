// Asymmetric schemes behind a four-operation interface (encrypt to a public
// key, decrypt with a private key, sign, verify).
//
// ToyScheme is deterministic from a seed and NOT secure: anyone holding a
// public key can forge its signatures and unwrap its ciphertexts. It exists so
// simulations and tests are reproducible. SodiumScheme uses Ed25519 signatures
// and X25519 sealed boxes.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "edgetrade/bytes.hpp"

namespace edgetrade {

struct PublicKey {
    Bytes bytes;
    friend bool operator==(const PublicKey&, const PublicKey&) = default;
};

struct PrivateKey {
    Bytes bytes;
};

struct KeyPair {
    PublicKey pub;
    PrivateKey priv;
};

class CryptoScheme {
public:
    virtual ~CryptoScheme() = default;

    virtual std::string_view name() const = 0;
    virtual KeyPair keygen(std::uint64_t seed) const = 0;
    virtual Bytes encrypt(const PublicKey& to, ByteView plain) const = 0;
    virtual std::optional<Bytes> decrypt(const PrivateKey& key, ByteView cipher) const = 0;
    virtual Bytes sign(const PrivateKey& key, ByteView msg) const = 0;
    virtual bool verify(const PublicKey& key, ByteView msg, ByteView sig) const = 0;
};

class ToyScheme final : public CryptoScheme {
public:
    std::string_view name() const override { return "toy"; }
    KeyPair keygen(std::uint64_t seed) const override;
    Bytes encrypt(const PublicKey& to, ByteView plain) const override;
    std::optional<Bytes> decrypt(const PrivateKey& key, ByteView cipher) const override;
    Bytes sign(const PrivateKey& key, ByteView msg) const override;
    bool verify(const PublicKey& key, ByteView msg, ByteView sig) const override;
};

class SodiumScheme final : public CryptoScheme {
public:
    SodiumScheme();

    std::string_view name() const override { return "sodium"; }
    // The seed is ignored; keys come from the system CSPRNG.
    KeyPair keygen(std::uint64_t seed) const override;
    Bytes encrypt(const PublicKey& to, ByteView plain) const override;
    std::optional<Bytes> decrypt(const PrivateKey& key, ByteView cipher) const override;
    Bytes sign(const PrivateKey& key, ByteView msg) const override;
    bool verify(const PublicKey& key, ByteView msg, ByteView sig) const override;
};

// "toy" or "sodium"; throws std::invalid_argument otherwise.
std::unique_ptr<CryptoScheme> make_scheme(std::string_view name);

// Symmetric layer shared by both schemes: XChaCha20-Poly1305 with the given
// 32-byte key. The nonce is derived from the key, which is never reused.
Bytes seal_symmetric(ByteView key, ByteView plain, ByteView associated);
std::optional<Bytes> open_symmetric(ByteView key, ByteView cipher, ByteView associated);

// HMAC-SHA256(key, msg).
Bytes hmac_sha256(ByteView key, ByteView msg);

}  // namespace edgetrade
