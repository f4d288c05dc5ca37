#include "abgp/rng.hpp"
#include "abgp/state.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace abgp;

struct Cluster {
    std::vector<crypto::KeyPair> keys;
    std::optional<records::ClusterSpec> spec;
    std::int64_t clock_ms = 0;

    explicit Cluster(std::size_t n, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<crypto::CurvePoint> members;
        for (std::size_t i = 0; i < n; ++i) {
            keys.push_back(crypto::KeyPair::generate(rng));
            members.push_back(keys.back().public_key);
        }
        spec = records::ClusterSpec::from_members(members);
    }

    state::StateStore store(std::size_t member) {
        return state::StateStore(*spec, keys[member], [this] { return ++clock_ms; });
    }
};

static void BM_AppendLocal(benchmark::State& state) {
    Cluster cluster(3, 11);
    auto store = cluster.store(0);
    std::uint64_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(store.append_local("key", "value", ++i));
    }
}
BENCHMARK(BM_AppendLocal);

static void BM_AppendRemoteCountersign(benchmark::State& state) {
    Cluster cluster(5, 12);
    auto origin = cluster.store(0);
    std::vector<records::RecordModel> batch;
    for (int i = 0; i < 8192; ++i) {
        batch.push_back(origin.append_local("key", "value", static_cast<std::uint64_t>(i)));
    }
    auto receiver = cluster.store(1);
    std::size_t i = 0;
    for (auto _ : state) {
        if (i == batch.size()) {
            state.SkipWithError("batch exhausted");
            break;
        }
        benchmark::DoNotOptimize(receiver.append_remote(batch[i++]));
    }
}
BENCHMARK(BM_AppendRemoteCountersign);

}  // namespace

BENCHMARK_MAIN();
