#include "abgp/crypto.hpp"
#include "abgp/errors.hpp"
#include "abgp/rng.hpp"

#include <openssl/evp.h>

// The scheme implemented here is deliberately NOT a secure signature scheme:
// a partial signature is private * hash, so the private key is recoverable as
// partialSignature * hash^-1 mod n. It exists to make replicated records
// attributable to cluster members and cheap to aggregate, nothing more. Do
// not reuse outside that setting.

namespace abgp::crypto {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
    std::array<std::uint8_t, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != 32) {
        throw Error(Errc::InternalError, "EVP_Digest failed");
    }
    return out;
}

Scalar hash_to_scalar(std::span<const std::uint8_t> digest) {
    if (digest.size() != 32) {
        throw Error(Errc::InvalidDigest, "digest must be exactly 32 bytes");
    }
    return Scalar::from_bytes_reduced(std::span<const std::uint8_t, 32>(digest.data(), 32));
}

CurvePoint derive_public_key(const Scalar& private_key) {
    if (private_key.is_zero()) {
        throw Error(Errc::InvalidKey, "private key must be nonzero");
    }
    return CurvePoint::mul_generator(private_key);
}

KeyPair KeyPair::from_private(const Scalar& private_key) {
    return KeyPair{private_key, derive_public_key(private_key)};
}

KeyPair KeyPair::generate(Rng& rng) {
    for (;;) {
        std::array<std::uint8_t, 32> bytes{};
        for (std::size_t i = 0; i < 4; ++i) {
            std::uint64_t v = rng.next_u64();
            for (std::size_t b = 0; b < 8; ++b) {
                bytes[i * 8 + b] = static_cast<std::uint8_t>(v >> (56 - 8 * b));
            }
        }
        Scalar s = Scalar::from_bytes_reduced(bytes);
        if (!s.is_zero()) return from_private(s);
    }
}

Scalar partial_sign(const Scalar& private_key, const Scalar& hash) {
    if (private_key.is_zero()) {
        throw Error(Errc::InvalidKey, "private key must be nonzero");
    }
    return private_key.mul(hash);
}

bool verify_partial(const Scalar& sig, const CurvePoint& public_key, const Scalar& hash) {
    return CurvePoint::mul_generator(sig) == public_key.mul(hash);
}

Scalar aggregate_partials(std::span<const Scalar> partials) {
    if (partials.empty()) {
        throw Error(Errc::EmptyAggregate, "cannot aggregate zero partial signatures");
    }
    Scalar sum;
    for (const auto& p : partials) sum = sum.add(p);
    return sum;
}

CurvePoint build_shared_public_key(std::span<const CurvePoint> publics, const Scalar& hash) {
    if (publics.empty()) {
        throw Error(Errc::EmptyAggregate, "cannot build a shared key from zero public keys");
    }
    CurvePoint sum;  // infinity
    for (const auto& p : publics) sum = sum.add(p.mul(hash));
    return sum;
}

bool verify_multisig(const Scalar& sig, const CurvePoint& shared_public_key) {
    return CurvePoint::mul_generator(sig) == shared_public_key;
}

}  // namespace abgp::crypto
