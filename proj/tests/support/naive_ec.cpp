#include "naive_ec.hpp"

#include <openssl/bn.h>

#include <cassert>
#include <cstring>
#include <memory>

namespace testsupport {

namespace {

const char* kFieldPrimeHex = "FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F";
const char* kGxHex = "79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798";
const char* kGyHex = "483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8";
const char* kOrderHex = "FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141";

struct Bn {
    BIGNUM* n = BN_new();
    Bn() = default;
    explicit Bn(const char* hex) { BN_hex2bn(&n, hex); }
    explicit Bn(std::span<const std::uint8_t> bytes) {
        BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), n);
    }
    ~Bn() { BN_free(n); }
    Bn(const Bn&) = delete;
    Bn& operator=(const Bn&) = delete;
};

BN_CTX* ctx() {
    static BN_CTX* c = BN_CTX_new();
    return c;
}

const BIGNUM* prime() {
    static Bn p(kFieldPrimeHex);
    return p.n;
}

std::array<std::uint8_t, 32> to_bytes(const BIGNUM* n) {
    std::array<std::uint8_t, 32> out{};
    BN_bn2binpad(n, out.data(), 32);
    return out;
}

}  // namespace

NaivePoint naive_generator() {
    NaivePoint g;
    g.infinity = false;
    Bn x(kGxHex), y(kGyHex);
    g.x = to_bytes(x.n);
    g.y = to_bytes(y.n);
    return g;
}

NaivePoint naive_add(const NaivePoint& p, const NaivePoint& q) {
    if (p.infinity) return q;
    if (q.infinity) return p;

    Bn x1(p.x), y1(p.y), x2(q.x), y2(q.y);
    Bn lambda, t1, t2;

    if (BN_cmp(x1.n, x2.n) == 0) {
        // same x: either doubling or inverse points
        BN_mod_add(t1.n, y1.n, y2.n, prime(), ctx());
        if (BN_is_zero(t1.n)) return NaivePoint{};  // p + (-p) = infinity
        // lambda = 3*x1^2 / (2*y1)
        BN_mod_sqr(t1.n, x1.n, prime(), ctx());
        BN_set_word(t2.n, 3);
        BN_mod_mul(t1.n, t1.n, t2.n, prime(), ctx());
        BN_mod_add(t2.n, y1.n, y1.n, prime(), ctx());
        BN_mod_inverse(t2.n, t2.n, prime(), ctx());
        BN_mod_mul(lambda.n, t1.n, t2.n, prime(), ctx());
    } else {
        // lambda = (y2 - y1) / (x2 - x1)
        BN_mod_sub(t1.n, y2.n, y1.n, prime(), ctx());
        BN_mod_sub(t2.n, x2.n, x1.n, prime(), ctx());
        BN_mod_inverse(t2.n, t2.n, prime(), ctx());
        BN_mod_mul(lambda.n, t1.n, t2.n, prime(), ctx());
    }

    Bn x3, y3;
    BN_mod_sqr(x3.n, lambda.n, prime(), ctx());
    BN_mod_sub(x3.n, x3.n, x1.n, prime(), ctx());
    BN_mod_sub(x3.n, x3.n, x2.n, prime(), ctx());
    BN_mod_sub(y3.n, x1.n, x3.n, prime(), ctx());
    BN_mod_mul(y3.n, lambda.n, y3.n, prime(), ctx());
    BN_mod_sub(y3.n, y3.n, y1.n, prime(), ctx());

    NaivePoint r;
    r.infinity = false;
    r.x = to_bytes(x3.n);
    r.y = to_bytes(y3.n);
    return r;
}

NaivePoint naive_mul(const NaivePoint& p, std::span<const std::uint8_t, 32> scalar_be) {
    NaivePoint result;  // infinity
    NaivePoint base = p;
    // LSB-first double-and-add over the raw bytes
    for (int byte = 31; byte >= 0; --byte) {
        for (int bit = 0; bit < 8; ++bit) {
            if (scalar_be[static_cast<std::size_t>(byte)] & (1u << bit)) {
                result = naive_add(result, base);
            }
            base = naive_add(base, base);
        }
    }
    return result;
}

std::string naive_compressed_hex(const NaivePoint& p) {
    static const char* digits = "0123456789abcdef";
    if (p.infinity) return std::string(66, '0');
    std::string out;
    out.reserve(66);
    const bool odd = (p.y[31] & 1) != 0;
    out.push_back('0');
    out.push_back(odd ? '3' : '2');
    for (std::uint8_t b : p.x) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0F]);
    }
    return out;
}

std::array<std::uint8_t, 32> naive_add_mod_order(const std::array<std::uint8_t, 32>& a,
                                                 const std::array<std::uint8_t, 32>& b) {
    static Bn order(kOrderHex);
    Bn ba(a), bb(b), sum;
    BN_mod_add(sum.n, ba.n, bb.n, order.n, ctx());
    return to_bytes(sum.n);
}

}  // namespace testsupport
