#include "abgp/crypto.hpp"
#include "abgp/errors.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <algorithm>
#include <mutex>

namespace abgp::crypto {

namespace {

EC_GROUP* group() {
    static EC_GROUP* g = [] {
        EC_GROUP* grp = EC_GROUP_new_by_curve_name(NID_secp256k1);
        if (grp == nullptr) throw Error(Errc::InternalError, "cannot create secp256k1 group");
        BN_CTX* ctx = BN_CTX_new();
        EC_GROUP_precompute_mult(grp, ctx);
        BN_CTX_free(ctx);
        return grp;
    }();
    return g;
}

BN_CTX* ctx() {
    static thread_local std::unique_ptr<BN_CTX, decltype(&BN_CTX_free)> c(BN_CTX_new(), &BN_CTX_free);
    return c.get();
}

using bn_ptr = std::unique_ptr<BIGNUM, decltype(&BN_free)>;

bn_ptr scalar_to_bn(const Scalar& s) {
    const auto bytes = s.to_bytes();
    return bn_ptr(BN_bin2bn(bytes.data(), 32, nullptr), &BN_free);
}

bool all_zero(std::span<const std::uint8_t> bytes) {
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

}  // namespace

struct CurvePoint::Impl {
    EC_POINT* pt = nullptr;

    Impl() : pt(EC_POINT_new(group())) {
        if (pt == nullptr) throw Error(Errc::InternalError, "EC_POINT_new failed");
    }
    ~Impl() { EC_POINT_free(pt); }
    Impl(const Impl&) = delete;
    Impl& operator=(const Impl&) = delete;
};

CurvePoint CurvePoint::from_impl(std::shared_ptr<const Impl> impl) {
    CurvePoint p;
    if (EC_POINT_is_at_infinity(group(), impl->pt) != 1) {
        const std::size_t n = EC_POINT_point2oct(group(), impl->pt, POINT_CONVERSION_COMPRESSED,
                                                 p.encoded_.data(), p.encoded_.size(), ctx());
        if (n != 33) throw Error(Errc::InternalError, "unexpected compressed point length");
    }
    p.impl_ = std::move(impl);
    return p;
}

CurvePoint::CurvePoint() {
    auto impl = std::make_shared<Impl>();
    EC_POINT_set_to_infinity(group(), impl->pt);
    impl_ = std::move(impl);
    encoded_ = {};
}

const CurvePoint& CurvePoint::generator() {
    static const CurvePoint g = [] {
        auto impl = std::make_shared<Impl>();
        if (EC_POINT_copy(impl->pt, EC_GROUP_get0_generator(group())) != 1)
            throw Error(Errc::InternalError, "cannot copy generator");
        return from_impl(std::move(impl));
    }();
    return g;
}

std::optional<CurvePoint> CurvePoint::from_bytes(std::span<const std::uint8_t> bytes) noexcept {
    if (bytes.size() != 33) return std::nullopt;
    if (all_zero(bytes)) return CurvePoint();
    if (bytes[0] != 0x02 && bytes[0] != 0x03) return std::nullopt;
    auto impl = std::make_shared<Impl>();
    // oct2point solves for y, so success implies the point is on the curve
    if (EC_POINT_oct2point(group(), impl->pt, bytes.data(), bytes.size(), ctx()) != 1) {
        return std::nullopt;
    }
    return from_impl(std::move(impl));
}

std::optional<CurvePoint> CurvePoint::from_hex(std::string_view hex) noexcept {
    if (hex.size() != 66) return std::nullopt;
    std::array<std::uint8_t, 33> bytes{};
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    for (std::size_t i = 0; i < 33; ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return from_bytes(bytes);
}

CurvePoint CurvePoint::mul_generator(const Scalar& k) {
    auto impl = std::make_shared<Impl>();
    auto bn = scalar_to_bn(k);
    if (EC_POINT_mul(group(), impl->pt, bn.get(), nullptr, nullptr, ctx()) != 1)
        throw Error(Errc::InternalError, "EC_POINT_mul(generator) failed");
    return from_impl(std::move(impl));
}

CurvePoint CurvePoint::mul(const Scalar& k) const {
    auto impl = std::make_shared<Impl>();
    auto bn = scalar_to_bn(k);
    if (EC_POINT_mul(group(), impl->pt, nullptr, impl_->pt, bn.get(), ctx()) != 1)
        throw Error(Errc::InternalError, "EC_POINT_mul failed");
    return from_impl(std::move(impl));
}

CurvePoint CurvePoint::add(const CurvePoint& other) const {
    auto impl = std::make_shared<Impl>();
    if (EC_POINT_add(group(), impl->pt, impl_->pt, other.impl_->pt, ctx()) != 1)
        throw Error(Errc::InternalError, "EC_POINT_add failed");
    return from_impl(std::move(impl));
}

bool CurvePoint::is_infinity() const noexcept { return all_zero(encoded_); }

std::array<std::uint8_t, 33> CurvePoint::to_bytes() const noexcept { return encoded_; }

std::string CurvePoint::to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(66, '0');
    for (std::size_t i = 0; i < 33; ++i) {
        out[2 * i] = digits[encoded_[i] >> 4];
        out[2 * i + 1] = digits[encoded_[i] & 0x0F];
    }
    return out;
}

}  // namespace abgp::crypto
