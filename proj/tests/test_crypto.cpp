#include "abgp/crypto.hpp"
#include "abgp/errors.hpp"
#include "abgp/rng.hpp"

#include "support/naive_ec.hpp"

#include <doctest.h>
#include <openssl/bn.h>

#include <algorithm>
#include <numeric>

using namespace abgp;
using crypto::CurvePoint;
using crypto::Scalar;

namespace {

// published secp256k1 generator multiples, compressed
constexpr const char* kG1 = "0279be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798";
constexpr const char* kG2 = "02c6047f9441ed7d6d3045406e95c07cd85c778e4b8cef3ca7abac09b95c709ee5";
constexpr const char* kG3 = "02f9308a019258c31049344f85f89d5229b531c845836f99b08601f113bce036f9";
constexpr const char* kG4 = "02e493dbf1c10d80f3581e4904930b1404cc6c13900ee0758474fa94abe8c4cd13";
constexpr const char* kG5 = "022f8bde4d1a07209355b4a7250a5c5128e88b84bddc619ab7cba8d569b240efe4";
constexpr const char* kOrderMinus1 =
    "fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364140";
constexpr const char* kOrderMinus2 =
    "fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd036413f";

Scalar hex_scalar(const char* hex) {
    auto s = Scalar::from_hex(hex);
    REQUIRE(s);
    return *s;
}

std::array<std::uint8_t, 32> bytes_of(std::string_view text) {
    std::array<std::uint8_t, 32> out{};
    REQUIRE(text.size() <= 32);
    std::copy(text.begin(), text.end(), out.begin());
    return out;
}

Scalar random_scalar(Rng& rng) {
    return crypto::KeyPair::generate(rng).private_key;
}

}  // namespace

TEST_SUITE_BEGIN("crypto");

TEST_CASE("hash_to_scalar reduces a 32-byte digest") {
    std::array<std::uint8_t, 32> zero{};
    CHECK(crypto::hash_to_scalar(zero) == Scalar());

    std::array<std::uint8_t, 32> one{};
    one[31] = 0x01;
    CHECK(crypto::hash_to_scalar(one) == Scalar::from_u64(1));

    // sha256("abc"), below the order so reduction is the identity
    const std::string abc = "abc";
    const auto digest = crypto::sha256(
        std::span(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()));
    CHECK(crypto::hash_to_scalar(digest).to_hex() ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

    // all-ones digest wraps: 2^256 - 1 mod n
    std::array<std::uint8_t, 32> ff{};
    ff.fill(0xFF);
    CHECK(crypto::hash_to_scalar(ff).to_hex() ==
          "000000000000000000000000000000014551231950b75fc4402da1732fc9bebe");

    std::array<std::uint8_t, 31> short_digest{};
    CHECK_THROWS_AS((void)crypto::hash_to_scalar(short_digest), Error);
    std::array<std::uint8_t, 33> long_digest{};
    CHECK_THROWS_AS((void)crypto::hash_to_scalar(long_digest), Error);
}

TEST_CASE("derive_public_key matches published generator multiples") {
    CHECK(crypto::derive_public_key(Scalar::from_u64(1)).to_hex() == kG1);
    CHECK(crypto::derive_public_key(Scalar::from_u64(2)).to_hex() == kG2);
    CHECK(crypto::derive_public_key(Scalar::from_u64(3)).to_hex() == kG3);
    CHECK(crypto::derive_public_key(Scalar::from_u64(4)).to_hex() == kG4);
    CHECK(crypto::derive_public_key(Scalar::from_u64(5)).to_hex() == kG5);

    // n-1 negates G: same x, odd y prefix
    const auto neg_g = crypto::derive_public_key(hex_scalar(kOrderMinus1));
    CHECK(neg_g.to_hex() == std::string("03") + std::string(kG1).substr(2));

    CHECK_THROWS_AS((void)crypto::derive_public_key(Scalar()), Error);
}

TEST_CASE("partial_sign is private * hash mod n") {
    const Scalar h = hex_scalar("00000000000000000000000000000000000000000000000000000000deadbeef");
    CHECK(crypto::partial_sign(Scalar::from_u64(1), h) == h);
    CHECK(crypto::partial_sign(Scalar::from_u64(2), Scalar::from_u64(3)) == Scalar::from_u64(6));
    CHECK(crypto::partial_sign(hex_scalar(kOrderMinus1), Scalar::from_u64(2)) ==
          hex_scalar(kOrderMinus2));
    CHECK_THROWS_AS((void)crypto::partial_sign(Scalar(), h), Error);
}

TEST_CASE("verify_partial accepts the paper equation and nothing else") {
    Rng rng(1001);
    const auto keys = crypto::KeyPair::generate(rng);
    const Scalar h = random_scalar(rng);
    const Scalar sig = crypto::partial_sign(keys.private_key, h);

    CHECK(crypto::verify_partial(sig, keys.public_key, h));
    CHECK_FALSE(crypto::verify_partial(sig.add(Scalar::from_u64(1)), keys.public_key, h));

    for (int trial = 0; trial < 100; ++trial) {
        const auto other = crypto::KeyPair::generate(rng);
        CHECK_FALSE(crypto::verify_partial(sig, other.public_key, h));
    }
}

TEST_CASE("aggregate_partials sums mod n") {
    const Scalar s = hex_scalar("00000000000000000000000000000000000000000000000000000000000000aa");
    CHECK(crypto::aggregate_partials(std::vector{s}) == s);
    CHECK(crypto::aggregate_partials(std::vector{Scalar::from_u64(1), Scalar::from_u64(2)}) ==
          Scalar::from_u64(3));
    CHECK(crypto::aggregate_partials(std::vector{hex_scalar(kOrderMinus1), Scalar::from_u64(2)}) ==
          Scalar::from_u64(1));
    CHECK_THROWS_AS((void)crypto::aggregate_partials(std::vector<Scalar>{}), Error);
}

TEST_CASE("aggregation operations are permutation invariant") {
    Rng rng(1002);
    std::vector<Scalar> parts;
    std::vector<CurvePoint> pubs;
    for (int i = 0; i < 4; ++i) {
        const auto kp = crypto::KeyPair::generate(rng);
        parts.push_back(kp.private_key);
        pubs.push_back(kp.public_key);
    }
    const Scalar h = random_scalar(rng);
    const Scalar agg = crypto::aggregate_partials(parts);
    const CurvePoint shared = crypto::build_shared_public_key(pubs, h);

    std::vector<std::size_t> perm{0, 1, 2, 3};
    do {
        std::vector<Scalar> p2;
        std::vector<CurvePoint> k2;
        for (std::size_t i : perm) {
            p2.push_back(parts[i]);
            k2.push_back(pubs[i]);
        }
        CHECK(crypto::aggregate_partials(p2) == agg);
        CHECK(crypto::build_shared_public_key(k2, h) == shared);
    } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("build_shared_public_key folds hash * publicKey") {
    Rng rng(1003);
    const auto kp = crypto::KeyPair::generate(rng);
    const Scalar h = random_scalar(rng);

    CHECK(crypto::build_shared_public_key(std::vector{kp.public_key}, h) == kp.public_key.mul(h));

    const auto doubled = crypto::build_shared_public_key(
        std::vector{kp.public_key, kp.public_key}, Scalar::from_u64(1));
    CHECK(doubled == kp.public_key.add(kp.public_key));

    CHECK_THROWS_AS((void)crypto::build_shared_public_key(std::vector<CurvePoint>{}, h), Error);
}

TEST_CASE("build_shared_public_key agrees with the naive affine oracle") {
    Rng rng(1004);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CurvePoint> pubs;
        std::vector<Scalar> privs;
        for (int i = 0; i < 3; ++i) {
            const auto kp = crypto::KeyPair::generate(rng);
            privs.push_back(kp.private_key);
            pubs.push_back(kp.public_key);
        }
        const Scalar h = random_scalar(rng);
        const CurvePoint shared = crypto::build_shared_public_key(pubs, h);

        testsupport::NaivePoint expected;  // infinity
        for (const auto& priv : privs) {
            const auto pub = testsupport::naive_mul(testsupport::naive_generator(),
                                                    priv.to_bytes());
            expected = testsupport::naive_add(expected, testsupport::naive_mul(pub, h.to_bytes()));
        }
        CHECK(shared.to_hex() == testsupport::naive_compressed_hex(expected));
    }
}

TEST_CASE("point multiplication agrees with the naive affine oracle") {
    Rng rng(1005);
    for (int trial = 0; trial < 30; ++trial) {
        const Scalar k = random_scalar(rng);
        const Scalar m = random_scalar(rng);
        const CurvePoint p = CurvePoint::mul_generator(k);
        const auto naive_p = testsupport::naive_mul(testsupport::naive_generator(), k.to_bytes());
        CHECK(p.to_hex() == testsupport::naive_compressed_hex(naive_p));
        CHECK(p.mul(m).to_hex() ==
              testsupport::naive_compressed_hex(testsupport::naive_mul(naive_p, m.to_bytes())));
    }
}

TEST_CASE("verify_multisig checks sig * G == sharedPublicKey") {
    // fixed golden: keys {2, 3}, hash 5 -> aggregate 25, shared key 25*G
    const Scalar h = Scalar::from_u64(5);
    const std::vector<Scalar> parts{crypto::partial_sign(Scalar::from_u64(2), h),
                                    crypto::partial_sign(Scalar::from_u64(3), h)};
    const Scalar agg = crypto::aggregate_partials(parts);
    CHECK(agg == Scalar::from_u64(25));

    const std::vector<CurvePoint> pubs{crypto::derive_public_key(Scalar::from_u64(2)),
                                       crypto::derive_public_key(Scalar::from_u64(3))};
    const CurvePoint shared = crypto::build_shared_public_key(pubs, h);
    CHECK(shared.to_hex() == "029248279b09b4d68dab21a9b066edda83263c3d84e09572e269ca0cd7f5453714");

    CHECK(crypto::verify_multisig(agg, shared));
    CHECK_FALSE(crypto::verify_multisig(agg.add(Scalar::from_u64(1)), shared));

    const CurvePoint shared_other_hash =
        crypto::build_shared_public_key(pubs, Scalar::from_u64(7));
    CHECK_FALSE(crypto::verify_multisig(agg, shared_other_hash));
}

TEST_CASE("compare_signatures is plain integer order") {
    CHECK(crypto::compare_signatures(Scalar::from_u64(5), Scalar::from_u64(3)) ==
          std::strong_ordering::greater);
    CHECK(crypto::compare_signatures(Scalar::from_u64(7), Scalar::from_u64(7)) ==
          std::strong_ordering::equal);
    CHECK(crypto::compare_signatures(hex_scalar(kOrderMinus1), Scalar::from_u64(1)) ==
          std::strong_ordering::greater);
}

TEST_CASE("scalar arithmetic matches the bignum oracle") {
    // the library's limb arithmetic vs an independent arbitrary-precision path
    BIGNUM* order = nullptr;
    BN_hex2bn(&order, "FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141");
    BN_CTX* ctx = BN_CTX_new();
    BIGNUM* ba = BN_new();
    BIGNUM* bb = BN_new();
    BIGNUM* br = BN_new();

    Rng rng(1006);
    for (int trial = 0; trial < 4000; ++trial) {
        const Scalar a = random_scalar(rng);
        const Scalar b = random_scalar(rng);
        const auto abytes = a.to_bytes();
        const auto bbytes = b.to_bytes();
        BN_bin2bn(abytes.data(), 32, ba);
        BN_bin2bn(bbytes.data(), 32, bb);

        BN_mod_mul(br, ba, bb, order, ctx);
        std::array<std::uint8_t, 32> expected{};
        BN_bn2binpad(br, expected.data(), 32);
        REQUIRE(a.mul(b).to_bytes() == expected);

        BN_mod_add(br, ba, bb, order, ctx);
        BN_bn2binpad(br, expected.data(), 32);
        REQUIRE(a.add(b).to_bytes() == expected);
    }

    BN_free(order);
    BN_free(ba);
    BN_free(bb);
    BN_free(br);
    BN_CTX_free(ctx);
}

TEST_CASE("scalar hex and bounds") {
    CHECK(Scalar().to_hex() == std::string(64, '0'));
    CHECK_FALSE(Scalar::from_hex("00"));
    CHECK_FALSE(Scalar::from_hex(std::string(63, '0') + "g"));
    CHECK_FALSE(
        Scalar::from_hex("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141"));
    CHECK(Scalar::from_hex(kOrderMinus1));

    Rng rng(1007);
    for (int i = 0; i < 100; ++i) {
        const Scalar s = random_scalar(rng);
        const auto round = Scalar::from_hex(s.to_hex());
        REQUIRE(round);
        CHECK(*round == s);
    }
}

TEST_CASE("point encoding round-trips and rejects junk") {
    Rng rng(1008);
    for (int i = 0; i < 50; ++i) {
        const CurvePoint p = CurvePoint::mul_generator(random_scalar(rng));
        const auto round = CurvePoint::from_hex(p.to_hex());
        REQUIRE(round);
        CHECK(*round == p);
    }

    CHECK_FALSE(CurvePoint::from_hex("02"));
    // bad prefix
    CHECK_FALSE(CurvePoint::from_hex(std::string("04") + std::string(kG1).substr(2)));
    // x with no square root on the curve
    CHECK_FALSE(CurvePoint::from_hex(
        "020000000000000000000000000000000000000000000000000000000000000005"));
    // infinity encodes as all-zero and round-trips
    const CurvePoint infinity;
    CHECK(infinity.is_infinity());
    const auto round = CurvePoint::from_hex(infinity.to_hex());
    REQUIRE(round);
    CHECK(round->is_infinity());
}

TEST_CASE("seeded partial-signature property") {
    Rng rng(424242);
    for (int trial = 0; trial < 200; ++trial) {
        const auto keys = crypto::KeyPair::generate(rng);
        const Scalar h = random_scalar(rng);
        const Scalar sig = crypto::partial_sign(keys.private_key, h);
        REQUIRE(crypto::verify_partial(sig, keys.public_key, h));
    }
}

TEST_CASE("seeded multisig property with permutations and byte flips") {
    Rng rng(434343);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng.uniform_below(6);  // 2..7 signers
        std::vector<crypto::KeyPair> keys;
        for (std::size_t i = 0; i < n; ++i) keys.push_back(crypto::KeyPair::generate(rng));
        const Scalar h = random_scalar(rng);

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        for (int perm = 0; perm < 3; ++perm) {
            // Fisher-Yates driven by the suite rng
            for (std::size_t i = n - 1; i > 0; --i) {
                std::swap(order[i], order[rng.uniform_below(i + 1)]);
            }
            std::vector<Scalar> parts;
            std::vector<CurvePoint> pubs;
            for (std::size_t i : order) {
                parts.push_back(crypto::partial_sign(keys[i].private_key, h));
                pubs.push_back(keys[i].public_key);
            }
            const Scalar agg = crypto::aggregate_partials(parts);
            const CurvePoint shared = crypto::build_shared_public_key(pubs, h);
            REQUIRE(crypto::verify_multisig(agg, shared));

            if (perm == 0) {
                auto flipped = agg.to_bytes();
                for (std::size_t byte = 0; byte < 32; byte += 5) {
                    flipped[byte] ^= 0xFF;
                    const Scalar bad = Scalar::from_bytes_reduced(flipped);
                    REQUIRE_FALSE(crypto::verify_multisig(bad, shared));
                    flipped[byte] ^= 0xFF;
                }
            }
        }
    }
}

TEST_CASE("key generation is deterministic under a seed") {
    Rng a(77);
    Rng b(77);
    for (int i = 0; i < 5; ++i) {
        CHECK(crypto::KeyPair::generate(a).public_key == crypto::KeyPair::generate(b).public_key);
    }
}

TEST_SUITE_END();
