#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace abgp {
class Rng;
}

namespace abgp::crypto {

/// Non-negative integer strictly below the secp256k1 group order. All record
/// hashes, partial signatures, multisignatures and roots live here. Arithmetic
/// is mod the group order throughout.
class Scalar {
public:
    Scalar() = default;  // zero

    static Scalar from_u64(std::uint64_t value) noexcept;

    /// Interprets 32 big-endian bytes and reduces mod the group order.
    static Scalar from_bytes_reduced(std::span<const std::uint8_t, 32> bytes) noexcept;

    /// Rejects values >= group order (and malformed hex / wrong length).
    static std::optional<Scalar> from_bytes(std::span<const std::uint8_t> bytes) noexcept;
    static std::optional<Scalar> from_hex(std::string_view hex) noexcept;

    Scalar add(const Scalar& other) const noexcept;  // (a + b) mod n
    Scalar mul(const Scalar& other) const noexcept;  // (a * b) mod n

    bool is_zero() const noexcept;

    std::array<std::uint8_t, 32> to_bytes() const noexcept;  // big-endian
    std::string to_hex() const;                              // 64 lowercase chars

    /// Integer comparison; total order.
    std::strong_ordering compare(const Scalar& other) const noexcept;
    std::strong_ordering operator<=>(const Scalar& other) const noexcept { return compare(other); }
    bool operator==(const Scalar& other) const noexcept = default;

    /// The group order as 32 big-endian bytes.
    static std::span<const std::uint8_t, 32> order_bytes() noexcept;

private:
    // little-endian 64-bit limbs, always fully reduced
    std::array<std::uint64_t, 4> limbs_{};
};

/// A point on secp256k1 (or the point at infinity). Canonical identity is the
/// 33-byte compressed encoding; comparisons and hashing use it directly.
class CurvePoint {
public:
    CurvePoint();  // point at infinity

    static const CurvePoint& generator();

    /// Decodes a 33-byte compressed encoding; validates the point is on the
    /// curve. 33 zero bytes decode to infinity.
    static std::optional<CurvePoint> from_bytes(std::span<const std::uint8_t> bytes) noexcept;
    static std::optional<CurvePoint> from_hex(std::string_view hex) noexcept;

    /// k * G through the precomputed generator table.
    static CurvePoint mul_generator(const Scalar& k);

    CurvePoint mul(const Scalar& k) const;
    CurvePoint add(const CurvePoint& other) const;

    bool is_infinity() const noexcept;

    std::array<std::uint8_t, 33> to_bytes() const noexcept;  // infinity: all zero
    std::string to_hex() const;                              // 66 lowercase chars

    bool operator==(const CurvePoint& other) const noexcept { return encoded_ == other.encoded_; }
    std::strong_ordering operator<=>(const CurvePoint& other) const noexcept {
        return encoded_ <=> other.encoded_;
    }

    struct Impl;

private:
    static CurvePoint from_impl(std::shared_ptr<const Impl> impl);

    std::shared_ptr<const Impl> impl_;        // immutable backing point, shared on copy
    std::array<std::uint8_t, 33> encoded_{};  // compressed form, cached at construction
};

struct KeyPair {
    Scalar private_key;
    CurvePoint public_key;

    /// Derives the public key; throws Error{InvalidKey} on a zero scalar.
    static KeyPair from_private(const Scalar& private_key);

    /// Uniform nonzero private key drawn from the generator.
    static KeyPair generate(Rng& rng);
};

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

/// Big-endian value of a 32-byte digest reduced mod the group order.
/// Throws Error{InvalidDigest} unless the digest is exactly 32 bytes.
Scalar hash_to_scalar(std::span<const std::uint8_t> digest);

/// private * G. Throws Error{InvalidKey} on a zero key.
CurvePoint derive_public_key(const Scalar& private_key);

/// (private * hash) mod n. Throws Error{InvalidKey} on a zero key.
Scalar partial_sign(const Scalar& private_key, const Scalar& hash);

/// true iff sig * G == hash * public.
bool verify_partial(const Scalar& sig, const CurvePoint& public_key, const Scalar& hash);

/// Sum mod n; permutation-invariant. Throws Error{EmptyAggregate} on [].
Scalar aggregate_partials(std::span<const Scalar> partials);

/// Sum of hash * publicKey_i; permutation-invariant.
/// Throws Error{EmptyAggregate} on [].
CurvePoint build_shared_public_key(std::span<const CurvePoint> publics, const Scalar& hash);

/// true iff sig * G == sharedPublicKey.
bool verify_multisig(const Scalar& sig, const CurvePoint& shared_public_key);

/// Integer comparison of the two scalars; the replacement rule for competing
/// multisignatures keeps the greater one.
std::strong_ordering compare_signatures(const Scalar& a, const Scalar& b) noexcept;

}  // namespace abgp::crypto
