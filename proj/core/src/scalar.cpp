#include "abgp/crypto.hpp"

#include <cstring>

namespace abgp::crypto {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// secp256k1 group order, little-endian limbs
constexpr std::array<u64, 4> kOrder = {
    0xBFD25E8CD0364141ull,
    0xBAAEDCE6AF48A03Bull,
    0xFFFFFFFFFFFFFFFEull,
    0xFFFFFFFFFFFFFFFFull,
};

// 2^256 - order; 2^256 ≡ kOrderGap (mod order)
constexpr std::array<u64, 3> kOrderGap = {
    0x402DA1732FC9BEBFull,
    0x4551231950B75FC4ull,
    0x0000000000000001ull,
};

constexpr std::array<std::uint8_t, 32> kOrderBytes = {
    0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFE,
    0xBA, 0xAE, 0xDC, 0xE6, 0xAF, 0x48, 0xA0, 0x3B, 0xBF, 0xD2, 0x5E, 0x8C, 0xD0, 0x36, 0x41, 0x41,
};

int cmp256(const u64* a, const u64* b) noexcept {
    for (int i = 3; i >= 0; --i) {
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    return 0;
}

// r = a - b, returns borrow
bool sub256(u64* r, const u64* a, const u64* b) noexcept {
    u128 borrow = 0;
    for (int i = 0; i < 4; ++i) {
        u128 d = static_cast<u128>(a[i]) - b[i] - borrow;
        r[i] = static_cast<u64>(d);
        borrow = (d >> 64) & 1;
    }
    return borrow != 0;
}

// r = a + b, returns carry
bool add256(u64* r, const u64* a, const u64* b) noexcept {
    u128 carry = 0;
    for (int i = 0; i < 4; ++i) {
        carry += static_cast<u128>(a[i]) + b[i];
        r[i] = static_cast<u64>(carry);
        carry >>= 64;
    }
    return carry != 0;
}

// out[an+bn] = a[an] * b[bn], schoolbook
void mul_limbs(const u64* a, int an, const u64* b, int bn, u64* out) noexcept {
    std::memset(out, 0, sizeof(u64) * static_cast<std::size_t>(an + bn));
    for (int i = 0; i < an; ++i) {
        u64 carry = 0;
        for (int j = 0; j < bn; ++j) {
            u128 t = static_cast<u128>(a[i]) * b[j] + out[i + j] + carry;
            out[i + j] = static_cast<u64>(t);
            carry = static_cast<u64>(t >> 64);
        }
        out[i + bn] = carry;
    }
}

// reduces an up-to-8-limb value mod the group order using 2^256 ≡ gap
std::array<u64, 4> reduce_wide(std::array<u64, 8> t) noexcept {
    for (;;) {
        bool high_zero = (t[4] | t[5] | t[6] | t[7]) == 0;
        if (high_zero) break;
        u64 prod[7];
        mul_limbs(&t[4], 4, kOrderGap.data(), 3, prod);
        std::array<u64, 8> next{};
        u128 carry = 0;
        for (int i = 0; i < 7; ++i) {
            carry += static_cast<u128>(prod[i]) + (i < 4 ? t[i] : 0);
            next[i] = static_cast<u64>(carry);
            carry >>= 64;
        }
        next[7] = static_cast<u64>(carry);
        t = next;
    }
    std::array<u64, 4> r = {t[0], t[1], t[2], t[3]};
    while (cmp256(r.data(), kOrder.data()) >= 0) {
        sub256(r.data(), r.data(), kOrder.data());
    }
    return r;
}

std::array<u64, 4> limbs_from_be(std::span<const std::uint8_t, 32> bytes) noexcept {
    std::array<u64, 4> limbs{};
    for (int limb = 0; limb < 4; ++limb) {
        u64 v = 0;
        for (int b = 0; b < 8; ++b) {
            v = (v << 8) | bytes[static_cast<std::size_t>((3 - limb) * 8 + b)];
        }
        limbs[static_cast<std::size_t>(limb)] = v;
    }
    return limbs;
}

int hex_nibble(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Scalar Scalar::from_u64(std::uint64_t value) noexcept {
    Scalar s;
    s.limbs_[0] = value;
    return s;
}

Scalar Scalar::from_bytes_reduced(std::span<const std::uint8_t, 32> bytes) noexcept {
    Scalar s;
    s.limbs_ = limbs_from_be(bytes);
    if (cmp256(s.limbs_.data(), kOrder.data()) >= 0) {
        sub256(s.limbs_.data(), s.limbs_.data(), kOrder.data());
    }
    return s;
}

std::optional<Scalar> Scalar::from_bytes(std::span<const std::uint8_t> bytes) noexcept {
    if (bytes.size() != 32) return std::nullopt;
    Scalar s;
    s.limbs_ = limbs_from_be(std::span<const std::uint8_t, 32>(bytes.data(), 32));
    if (cmp256(s.limbs_.data(), kOrder.data()) >= 0) return std::nullopt;
    return s;
}

std::optional<Scalar> Scalar::from_hex(std::string_view hex) noexcept {
    if (hex.size() != 64) return std::nullopt;
    std::array<std::uint8_t, 32> bytes{};
    for (std::size_t i = 0; i < 32; ++i) {
        int hi = hex_nibble(hex[2 * i]);
        int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return from_bytes(bytes);
}

Scalar Scalar::add(const Scalar& other) const noexcept {
    Scalar r;
    bool carry = add256(r.limbs_.data(), limbs_.data(), other.limbs_.data());
    if (carry) {
        // a + b = 2^256 + r with r < n - gap, so the result is r + gap
        const u64 gap[4] = {kOrderGap[0], kOrderGap[1], kOrderGap[2], 0};
        add256(r.limbs_.data(), r.limbs_.data(), gap);
    } else if (cmp256(r.limbs_.data(), kOrder.data()) >= 0) {
        sub256(r.limbs_.data(), r.limbs_.data(), kOrder.data());
    }
    return r;
}

Scalar Scalar::mul(const Scalar& other) const noexcept {
    std::array<u64, 8> wide{};
    mul_limbs(limbs_.data(), 4, other.limbs_.data(), 4, wide.data());
    Scalar r;
    r.limbs_ = reduce_wide(wide);
    return r;
}

bool Scalar::is_zero() const noexcept {
    return (limbs_[0] | limbs_[1] | limbs_[2] | limbs_[3]) == 0;
}

std::array<std::uint8_t, 32> Scalar::to_bytes() const noexcept {
    std::array<std::uint8_t, 32> out{};
    for (int limb = 0; limb < 4; ++limb) {
        u64 v = limbs_[static_cast<std::size_t>(limb)];
        for (int b = 7; b >= 0; --b) {
            out[static_cast<std::size_t>((3 - limb) * 8 + (7 - b))] =
                static_cast<std::uint8_t>(v >> (b * 8));
        }
    }
    return out;
}

std::string Scalar::to_hex() const {
    static const char* digits = "0123456789abcdef";
    const auto bytes = to_bytes();
    std::string out(64, '0');
    for (std::size_t i = 0; i < 32; ++i) {
        out[2 * i] = digits[bytes[i] >> 4];
        out[2 * i + 1] = digits[bytes[i] & 0x0F];
    }
    return out;
}

std::strong_ordering Scalar::compare(const Scalar& other) const noexcept {
    int c = cmp256(limbs_.data(), other.limbs_.data());
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::span<const std::uint8_t, 32> Scalar::order_bytes() noexcept {
    return std::span<const std::uint8_t, 32>(kOrderBytes.data(), 32);
}

std::strong_ordering compare_signatures(const Scalar& a, const Scalar& b) noexcept {
    return a.compare(b);
}

}  // namespace abgp::crypto
