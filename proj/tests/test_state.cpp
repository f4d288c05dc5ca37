#include "abgp/errors.hpp"
#include "abgp/state.hpp"

#include "support/naive_ec.hpp"
#include "support/testutil.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace abgp;
using testsupport::FakeClock;
using testsupport::TestCluster;

namespace {

state::StateStore make_store(const TestCluster& tc, std::size_t member, FakeClock& clock) {
    return state::StateStore(tc.cluster(), tc.keys.at(member), clock.fn());
}

}  // namespace

TEST_SUITE_BEGIN("state");

TEST_CASE("append_local stamps and signs an intermediate record") {
    TestCluster tc(3, 100);
    FakeClock clock;
    auto store = make_store(tc, 0, clock);

    const auto& rec = store.append_local("key", "value", 1);
    CHECK(rec.timestamp == 1000);
    CHECK(rec.timestamp_index == 0);
    CHECK(rec.created_at == 1000);
    CHECK(rec.signature_type == records::SignatureType::Intermediate);
    CHECK(rec.signatures.size() == 1);
    CHECK(rec.public_keys == std::vector{tc.keys[0].public_key});
    CHECK(records::validate_record(rec, tc.cluster()).ok());

    // same millisecond: the index disambiguates
    const auto& rec2 = store.append_local("key", "value", 2);
    CHECK(rec2.timestamp == 1000);
    CHECK(rec2.timestamp_index == 1);

    clock.now = 1001;
    const auto& rec3 = store.append_local("key", "value", 3);
    CHECK(rec3.timestamp == 1001);
    CHECK(rec3.timestamp_index == 0);

    CHECK_THROWS_AS((void)store.append_local("key", "value", 1), Error);
}

TEST_CASE("reduced timestamp index keeps the index pinned to zero") {
    TestCluster tc(3, 120);
    FakeClock clock;
    state::StateStore store(tc.cluster(), tc.keys[0], clock.fn(),
                            state::StoreOptions{/*reduced_timestamp_index=*/true});

    const auto& first = store.append_local("a", "v", 1);
    CHECK(first.timestamp == 1000);
    CHECK(first.timestamp_index == 0);

    // a same-millisecond collision bumps the stamp instead of the index
    const auto& second = store.append_local("b", "v", 1);
    CHECK(second.timestamp == 1001);
    CHECK(second.timestamp_index == 0);

    clock.now = 5000;
    const auto& third = store.append_local("c", "v", 1);
    CHECK(third.timestamp == 5000);
    CHECK(third.timestamp_index == 0);
}

TEST_CASE("append_remote stores and countersigns unknown intermediates") {
    TestCluster tc(5, 101);  // Q = 3 so countersigning does not promote yet
    FakeClock clock;
    auto store = make_store(tc, 0, clock);

    const auto incoming = testsupport::make_intermediate(tc, "key", "value", 1, {1}, 555, 7);
    clock.now = 2000;
    const auto outcome = store.append_remote(incoming);
    CHECK(outcome.kind == state::AppendKind::StoredNew);

    const auto* stored = store.find(incoming.hash);
    REQUIRE(stored != nullptr);
    CHECK(stored->signatures.size() == 2);  // origin + our countersignature
    CHECK(stored->signatures.contains(tc.keys[0].public_key));
    CHECK(stored->timestamp == 2000);      // re-stamped locally
    CHECK(stored->created_at == 555);      // creation time preserved
    CHECK(records::validate_record(*stored, tc.cluster()).ok());
}

TEST_CASE("append_remote walks every decision branch") {
    TestCluster tc(5, 102);  // f=2, Q=3
    FakeClock clock;

    SUBCASE("merge adds only new signatures") {
        auto store = make_store(tc, 0, clock);
        store.append_remote(testsupport::make_intermediate(tc, "key", "v", 1, {1}));
        // local now has {1, 0}; incoming has {1, 2} -> adds only 2 -> quorum
        const auto outcome =
            store.append_remote(testsupport::make_intermediate(tc, "key", "v", 1, {1, 2}));
        CHECK(outcome.kind == state::AppendKind::PromotedToMultisig);
        CHECK(store.find(records::compute_record_hash("key", "v", 1))->public_keys.size() == 3);
        CHECK(store.confirmed_count() == 1);
    }

    SUBCASE("merge below quorum reports the added count") {
        TestCluster tc7(7, 103);  // Q = 4
        auto store = state::StateStore(tc7.cluster(), tc7.keys[0], clock.fn());
        store.append_remote(testsupport::make_intermediate(tc7, "key", "v", 1, {1}));
        const auto outcome =
            store.append_remote(testsupport::make_intermediate(tc7, "key", "v", 1, {2}));
        CHECK(outcome.kind == state::AppendKind::SignaturesMerged);
        CHECK(outcome.merged_signatures == 1);
        const auto again =
            store.append_remote(testsupport::make_intermediate(tc7, "key", "v", 1, {2}));
        CHECK(again.kind == state::AppendKind::SignaturesMerged);
        CHECK(again.merged_signatures == 0);
    }

    SUBCASE("multisig replaces a local intermediate and confirms") {
        auto store = make_store(tc, 0, clock);
        store.append_local("key", "v", 1);
        const auto multisig = testsupport::make_multisig(tc, "key", "v", 1, {1, 2, 3});
        const auto outcome = store.append_remote(multisig);
        CHECK(outcome.kind == state::AppendKind::ReplacedByMultisig);
        CHECK(store.confirmed_count() == 1);
        CHECK(store.current_root() == crypto::hash_to_scalar(multisig.hash));
    }

    SUBCASE("competing multisigs keep the greater aggregate") {
        auto store = make_store(tc, 0, clock);
        const auto a = testsupport::make_multisig(tc, "key", "v", 1, {0, 1, 2});
        const auto b = testsupport::make_multisig(tc, "key", "v", 1, {1, 2, 3});
        const auto& low =
            a.signatures.begin()->second < b.signatures.begin()->second ? a : b;
        const auto& high =
            a.signatures.begin()->second < b.signatures.begin()->second ? b : a;

        store.append_remote(high);
        const auto snapshot = *store.find(a.hash);
        const auto keep = store.append_remote(low);
        CHECK(keep.kind == state::AppendKind::KeptHigherMultisig);
        CHECK_FALSE(keep.adopted_incoming);
        CHECK(*store.find(a.hash) == snapshot);  // store unchanged by the loser

        const auto root_before = store.current_root();
        auto store2 = make_store(tc, 0, clock);
        store2.append_remote(low);
        const auto adopt = store2.append_remote(high);
        CHECK(adopt.kind == state::AppendKind::KeptHigherMultisig);
        CHECK(adopt.adopted_incoming);
        CHECK(store2.find(a.hash)->signatures == high.signatures);
        CHECK(store2.current_root() == root_before);  // same hash, root unchanged

        const auto duplicate = store2.append_remote(high);
        CHECK(duplicate.kind == state::AppendKind::Ignored);
        CHECK(duplicate.reason == state::IgnoreReason::DuplicateMultisig);
    }

    SUBCASE("an intermediate never downgrades a multisig") {
        auto store = make_store(tc, 0, clock);
        store.append_remote(testsupport::make_multisig(tc, "key", "v", 1, {1, 2, 3}));
        const auto outcome =
            store.append_remote(testsupport::make_intermediate(tc, "key", "v", 1, {4}));
        CHECK(outcome.kind == state::AppendKind::Ignored);
        CHECK(outcome.reason == state::IgnoreReason::StaleIntermediate);
        CHECK(store.find(records::compute_record_hash("key", "v", 1))->signature_type ==
              records::SignatureType::Multisig);
    }

    SUBCASE("invalid records are ignored with their reason") {
        auto store = make_store(tc, 0, clock);
        auto bad = testsupport::make_intermediate(tc, "key", "v", 1, {1});
        bad.value = "tampered";
        const auto outcome = store.append_remote(bad);
        CHECK(outcome.kind == state::AppendKind::Ignored);
        CHECK(outcome.reason == state::IgnoreReason::BadHash);
        CHECK(store.record_count() == 0);
    }
}

TEST_CASE("promotion folds every signature present") {
    TestCluster tc(3, 104);  // Q = 2
    const auto rec = testsupport::make_intermediate(tc, "key", "v", 1, {0, 1, 2});
    const auto promoted = state::promote_to_multisig(rec, tc.cluster());
    CHECK(promoted.signature_type == records::SignatureType::Multisig);
    CHECK(promoted.signatures.size() == 1);
    CHECK(promoted.public_keys.size() == 3);  // all present, not a Q-subset
    CHECK(records::validate_record(promoted, tc.cluster()).ok());

    const auto thin = testsupport::make_intermediate(tc, "key2", "v", 1, {0});
    CHECK_THROWS_AS((void)state::promote_to_multisig(thin, tc.cluster()), Error);
}

TEST_CASE("promotion output always validates") {
    Rng rng(105);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 3 + rng.uniform_below(5);
        TestCluster tc(n, rng.next_u64());
        std::vector<std::size_t> signers;
        for (std::size_t i = 0; i < tc.cluster().quorum(); ++i) signers.push_back(i);
        const auto promoted =
            testsupport::make_multisig(tc, "k" + std::to_string(trial), "v", 1, signers);
        REQUIRE(records::validate_record(promoted, tc.cluster()).ok());
    }
}

TEST_CASE("promotion threshold is exactly Q for N in {3,5,7}") {
    for (std::size_t n : {std::size_t{3}, std::size_t{5}, std::size_t{7}}) {
        TestCluster tc(n, 200 + n);
        FakeClock clock;
        auto store = state::StateStore(tc.cluster(), tc.keys[0], clock.fn());
        const std::size_t quorum = tc.cluster().quorum();

        store.append_local("key", "v", 1);  // signature 1 of quorum
        const auto hash = records::compute_record_hash("key", "v", 1);
        for (std::size_t k = 1; k < n; ++k) {
            const auto* before = store.find(hash);
            REQUIRE(before != nullptr);
            const bool was_multisig = before->signature_type == records::SignatureType::Multisig;
            const auto outcome =
                store.append_remote(testsupport::make_intermediate(tc, "key", "v", 1, {k}));
            const std::size_t distinct = k + 1;
            if (distinct == quorum) {
                CHECK(outcome.kind == state::AppendKind::PromotedToMultisig);
            } else if (distinct < quorum) {
                CHECK(outcome.kind == state::AppendKind::SignaturesMerged);
                CHECK(store.find(hash)->signature_type == records::SignatureType::Intermediate);
            } else {
                CHECK(was_multisig);  // already promoted, stays promoted
                CHECK(outcome.kind == state::AppendKind::Ignored);
            }
        }
        CHECK(store.find(hash)->signature_type == records::SignatureType::Multisig);
    }
}

TEST_CASE("update_root accumulates order-independently and guards double counts") {
    TestCluster tc(3, 106);
    FakeClock clock;

    std::vector<records::RecordModel> confirmed;
    for (int i = 0; i < 12; ++i) {
        confirmed.push_back(
            testsupport::make_multisig(tc, "k" + std::to_string(i), "v", 1, {0, 1}));
    }

    auto run_order = [&](const std::vector<std::size_t>& order) {
        auto store = make_store(tc, 2, clock);
        for (std::size_t i : order) store.append_remote(confirmed[i]);
        return store.current_root();
    };

    std::vector<std::size_t> order(confirmed.size());
    std::iota(order.begin(), order.end(), 0);
    const auto forward = run_order(order);
    std::reverse(order.begin(), order.end());
    CHECK(run_order(order) == forward);

    Rng rng(107);
    for (int shuffle = 0; shuffle < 20; ++shuffle) {
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            std::swap(order[i], order[rng.uniform_below(i + 1)]);
        }
        CHECK(run_order(order) == forward);
    }

    // independent byte-level accumulation oracle
    std::array<std::uint8_t, 32> expected{};
    for (const auto& rec : confirmed) {
        expected = testsupport::naive_add_mod_order(expected, rec.hash);
    }
    CHECK(forward.to_bytes() == expected);

    // double counting is an internal error
    auto store = make_store(tc, 2, clock);
    store.append_remote(confirmed[0]);
    CHECK_THROWS_AS((void)store.update_root(confirmed[0].hash), Error);
}

TEST_CASE("current_root tracks the most recent confirmed record") {
    TestCluster tc(3, 108);
    FakeClock clock;
    auto store = make_store(tc, 2, clock);
    CHECK(store.current_root() == crypto::Scalar());

    const auto first = testsupport::make_multisig(tc, "k1", "v", 1, {0, 1});
    store.append_remote(first);
    CHECK(store.current_root() == crypto::hash_to_scalar(first.hash));
    CHECK(*store.find(first.hash)->state_hash == store.current_root());

    clock.now = 2000;
    const auto second = testsupport::make_multisig(tc, "k2", "v", 1, {0, 1});
    store.append_remote(second);
    // stateHash of the newest confirmed record equals the running root
    CHECK(*store.find(second.hash)->state_hash == store.current_root());
    CHECK(store.replay_validate());
}

TEST_CASE("replay_validate detects corruption") {
    TestCluster tc(3, 109);
    FakeClock clock;
    auto store = make_store(tc, 2, clock);
    store.append_remote(testsupport::make_multisig(tc, "k", "v", 1, {0, 1}));
    CHECK(store.replay_validate());

    // a restored record whose hash does not match its content must trip it
    auto fresh = make_store(tc, 2, clock);
    auto forged = testsupport::make_multisig(tc, "k", "v", 1, {0, 1});
    forged.value = "flipped";
    fresh.restore_record(forged);
    CHECK_FALSE(fresh.replay_validate());
}

TEST_CASE("records_after paginates in replication order") {
    TestCluster tc(3, 110);
    FakeClock clock;
    auto store = make_store(tc, 0, clock);

    CHECK(store.records_after(0, 0, 10).empty());

    clock.now = 5;
    store.append_local("a", "v", 1);
    store.append_local("b", "v", 1);  // (5,1)
    clock.now = 6;
    store.append_local("c", "v", 1);
    clock.now = 7;
    store.append_local("d", "v", 1);

    const auto after_five = store.records_after(5, 0, 10);
    REQUIRE(after_five.size() == 3);  // (5,1), (6,0), (7,0)
    CHECK(after_five[0].key == "b");
    CHECK(after_five[1].key == "c");
    CHECK(after_five[2].key == "d");

    const auto limited = store.records_after(0, 0, 2);
    REQUIRE(limited.size() == 2);
    CHECK(limited[0].key == "a");
    CHECK(limited[1].key == "b");

    clock.now = 8;
    for (int i = 0; i < 25; ++i) store.append_local("k" + std::to_string(i), "v", 1);
    CHECK(store.records_after(0, 0, 10).size() == 10);
}

TEST_CASE("append_remote is idempotent") {
    TestCluster tc(5, 111);
    FakeClock clock;
    auto store = make_store(tc, 0, clock);

    const auto incoming = testsupport::make_intermediate(tc, "key", "v", 1, {1});
    store.append_remote(incoming);
    const auto snapshot = *store.find(incoming.hash);
    const auto root = store.current_root();

    const auto again = store.append_remote(incoming);
    CHECK((again.kind == state::AppendKind::Ignored ||
           (again.kind == state::AppendKind::SignaturesMerged && again.merged_signatures == 0)));
    CHECK(*store.find(incoming.hash) == snapshot);
    CHECK(store.current_root() == root);
    CHECK(store.record_count() == 1);

    const auto multisig = testsupport::make_multisig(tc, "key2", "v", 1, {1, 2, 3});
    store.append_remote(multisig);
    const auto snapshot2 = *store.find(multisig.hash);
    const auto replay = store.append_remote(multisig);
    CHECK(replay.kind == state::AppendKind::Ignored);
    CHECK(replay.reason == state::IgnoreReason::DuplicateMultisig);
    CHECK(*store.find(multisig.hash) == snapshot2);
}

TEST_CASE("hostile records never land in the store") {
    TestCluster tc(5, 112);
    TestCluster outsiders(5, 113);
    FakeClock clock;
    auto store = make_store(tc, 0, clock);
    Rng rng(114);

    for (int trial = 0; trial < 300; ++trial) {
        auto rec = testsupport::make_intermediate(
            tc, "k" + std::to_string(rng.uniform_below(40)), "v", 1,
            {rng.uniform_below(tc.keys.size())});
        switch (rng.uniform_below(5)) {
            case 0: rec.value += "x"; break;                                    // stale hash
            case 1: rec.hash[0] ^= 0x01; break;                                 // wrong hash
            case 2: {                                                           // foreign signer
                auto bad = testsupport::make_intermediate(
                    outsiders, rec.key, rec.value, rec.version, {0});
                rec = bad;
                break;
            }
            case 3:  // corrupted signature
                rec.signatures.begin()->second =
                    rec.signatures.begin()->second.add(crypto::Scalar::from_u64(1));
                break;
            case 4:  // inflated signer list
                rec.public_keys.push_back(tc.keys[(rng.uniform_below(4) + 1) % 5].public_key);
                std::sort(rec.public_keys.begin(), rec.public_keys.end());
                rec.public_keys.erase(
                    std::unique(rec.public_keys.begin(), rec.public_keys.end()),
                    rec.public_keys.end());
                break;
        }
        const auto outcome = store.append_remote(rec);
        if (outcome.kind != state::AppendKind::Ignored) {
            // rare: the mutation happened to leave a valid record; it must be valid then
            REQUIRE(records::validate_record(rec, tc.cluster()).ok());
        }
    }
    CHECK(store.replay_validate());
}

TEST_SUITE_END();
