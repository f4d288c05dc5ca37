#include "abgp/crypto.hpp"
#include "abgp/rng.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace abgp;

static void BM_PartialSign(benchmark::State& state) {
    Rng rng(1);
    auto keys = crypto::KeyPair::generate(rng);
    auto hash = crypto::KeyPair::generate(rng).private_key;
    for (auto _ : state) {
        benchmark::DoNotOptimize(crypto::partial_sign(keys.private_key, hash));
    }
}
BENCHMARK(BM_PartialSign);

static void BM_VerifyPartial(benchmark::State& state) {
    Rng rng(2);
    auto keys = crypto::KeyPair::generate(rng);
    auto hash = crypto::KeyPair::generate(rng).private_key;
    auto sig = crypto::partial_sign(keys.private_key, hash);
    for (auto _ : state) {
        benchmark::DoNotOptimize(crypto::verify_partial(sig, keys.public_key, hash));
    }
}
BENCHMARK(BM_VerifyPartial);

static void BM_BuildSharedKey(benchmark::State& state) {
    Rng rng(3);
    std::vector<crypto::CurvePoint> keys;
    for (int i = 0; i < state.range(0); ++i) keys.push_back(crypto::KeyPair::generate(rng).public_key);
    auto hash = crypto::KeyPair::generate(rng).private_key;
    for (auto _ : state) {
        benchmark::DoNotOptimize(crypto::build_shared_public_key(keys, hash));
    }
}
BENCHMARK(BM_BuildSharedKey)->Arg(2)->Arg(4)->Arg(7);

}  // namespace
