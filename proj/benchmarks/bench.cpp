// Microbenchmarks for the hot paths: exhaustive ranking, divergence math,
// loss evaluation and the adapter gradient. Synthetic fixtures are seeded so
// runs are comparable across machines.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "xlb/align.hpp"
#include "xlb/embedding.hpp"
#include "xlb/metrics.hpp"
#include "xlb/retrieval.hpp"
#include "xlb/scenario.hpp"
#include "xlb/synth.hpp"

using namespace xlb;

namespace {

EmbeddingMatrix random_unit_matrix(std::size_t rows, std::size_t dim, uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    EmbeddingMatrix m(dim);
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> v(dim);
        for (auto& x : v) x = nd(gen);
        m.add_row("d" + std::to_string(r), v);
    }
    return l2_normalize(m);
}

TripletBatch random_triplet_batch(std::size_t n, std::size_t dim, uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    TripletBatch b;
    auto draw = [&] {
        Vec v(dim);
        for (auto& x : v) x = nd(gen);
        return v;
    };
    for (std::size_t i = 0; i < n; ++i) {
        b.q_en.push_back(draw());
        b.p_en.push_back(draw());
        b.p_tgt.push_back(draw());
    }
    return b;
}

void BM_Rank(benchmark::State& state) {
    std::size_t pool_size = std::size_t(state.range(0));
    EmbeddingMatrix m = random_unit_matrix(pool_size + 1, 64, 7);
    std::vector<std::string> pool;
    for (std::size_t i = 1; i <= pool_size; ++i) pool.push_back("d" + std::to_string(i));
    for (auto _ : state) {
        Ranking r = rank("d0", pool, m);
        benchmark::DoNotOptimize(r.entries.data());
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(pool_size));
}
BENCHMARK(BM_Rank)->Arg(256)->Arg(1024)->Arg(4096);

void BM_Softmax(benchmark::State& state) {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> nd(0.0, 2.0);
    Vec z(std::size_t(state.range(0)));
    for (auto& x : z) x = nd(gen);
    for (auto _ : state) {
        Vec p = softmax(z);
        benchmark::DoNotOptimize(p.data());
    }
}
BENCHMARK(BM_Softmax)->Arg(64)->Arg(512);

void BM_Jsd(benchmark::State& state) {
    std::mt19937_64 gen(13);
    std::normal_distribution<double> nd(0.0, 2.0);
    std::size_t d = std::size_t(state.range(0));
    Vec a(d), b(d);
    for (auto& x : a) x = nd(gen);
    for (auto& x : b) x = nd(gen);
    Vec p = softmax(a), q = softmax(b);
    for (auto _ : state) benchmark::DoNotOptimize(jsd(p, q));
}
BENCHMARK(BM_Jsd)->Arg(16)->Arg(64)->Arg(256);

void BM_LossCombined(benchmark::State& state) {
    TripletBatch batch = random_triplet_batch(32, 64, 17);
    AdapterParams adapter = AdapterParams::identity(64);
    LossOptions opts;
    for (auto _ : state) benchmark::DoNotOptimize(loss_combined(batch, adapter, opts).total);
}
BENCHMARK(BM_LossCombined);

void BM_GradAdapter(benchmark::State& state) {
    TripletBatch batch = random_triplet_batch(std::size_t(state.range(0)), 64, 19);
    AdapterParams adapter = AdapterParams::identity(64);
    LossOptions opts;
    for (auto _ : state) {
        AdapterGrad g = grad_adapter(batch, adapter, opts);
        benchmark::DoNotOptimize(g.dW.data());
    }
}
BENCHMARK(BM_GradAdapter)->Arg(8)->Arg(32);

void BM_EmbedSynthetic(benchmark::State& state) {
    SynthConfig cfg;
    cfg.n_groups = std::size_t(state.range(0));
    ParallelCorpus corpus = gen_synthetic_corpus(cfg);
    for (auto _ : state) {
        EmbeddingMatrix m = embed_synthetic(corpus, cfg);
        benchmark::DoNotOptimize(m.rows());
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(corpus.items().size()));
}
BENCHMARK(BM_EmbedSynthetic)->Arg(100);

void BM_MultiScenarioEval(benchmark::State& state) {
    SynthConfig cfg;
    cfg.n_groups = 100;
    ParallelCorpus corpus = gen_synthetic_corpus(cfg);
    EmbeddingMatrix emb = l2_normalize(embed_synthetic(corpus, cfg));
    auto instances = build_scenario(corpus, {ScenarioKind::Multi, "zh", cfg.languages});
    for (auto _ : state) {
        auto rankings = retrieve_all(instances, emb, 1);
        benchmark::DoNotOptimize(rankings.data());
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(instances.size()));
}
BENCHMARK(BM_MultiScenarioEval);

}  // namespace

BENCHMARK_MAIN();
