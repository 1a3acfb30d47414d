#include <benchmark/benchmark.h>

#include "reliablocks/avs.hpp"
#include "reliablocks/feed.hpp"
#include "reliablocks/scoring.hpp"

using namespace reliablocks;

namespace {

ScoringParams params() {
    ScoringParams p;
    p.kappa_value = 1000.0;
    p.kappa_depth = 20.0;
    p.finality_depth = 100;
    return p;
}

std::vector<FeedRecord> feed(std::uint64_t blocks, double rate) {
    GenParams gp;
    gp.num_blocks = blocks;
    gp.exit_rate = rate;
    return generate_feed(gp);
}

void BM_ApplyFeed(benchmark::State& state) {
    auto p = params();
    auto records = feed(static_cast<std::uint64_t>(state.range(0)), 2.0);
    for (auto _ : state) {
        ChainState s;
        for (const auto& r : records) {
            if (r.is_exit())
                s.apply_event(r.exit(), p);
            else
                s.advance_head(r.head().l2_block);
        }
        benchmark::DoNotOptimize(s.head());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_ApplyFeed)->Arg(100)->Arg(1000);

void BM_QueryBlock(benchmark::State& state) {
    auto p = params();
    ChainState s;
    for (const auto& r : feed(1000, 2.0)) {
        if (r.is_exit())
            s.apply_event(r.exit(), p);
        else
            s.advance_head(r.head().l2_block);
    }
    std::uint64_t b = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(s.query_block(b, p).score);
        b = (b + 37) % (s.head() + 1);
    }
}
BENCHMARK(BM_QueryBlock);

void BM_ScoreFromWeight(benchmark::State& state) {
    auto p = params();
    double w = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(score_from_weight(w, false, p));
        w += 1e-4;
        if (w > 10.0) w = 0.0;
    }
}
BENCHMARK(BM_ScoreFromWeight);

void BM_GenerateFeed(benchmark::State& state) {
    GenParams gp;
    gp.num_blocks = static_cast<std::uint64_t>(state.range(0));
    gp.exit_rate = 1.0;
    for (auto _ : state) {
        auto records = generate_feed(gp);
        benchmark::DoNotOptimize(records.size());
    }
}
BENCHMARK(BM_GenerateFeed)->Arg(100)->Arg(1000);

void BM_AggregationRound(benchmark::State& state) {
    auto sp = params();
    ChainState chain;
    FastExitEvent e;
    e.id = "fe-1";
    e.value_base_units = u128{1000} * u128{1000000000000000000ULL};
    chain.apply_event(e, sp);
    AvsParams ap;
    for (auto _ : state) {
        AvsWorld w;
        w.fund_reward_pool(ap.reward_per_task);
        for (int i = 0; i < static_cast<int>(state.range(0)); ++i)
            w.register_operator("op" + std::to_string(i), 100000, Strategy{}, ap);
        benchmark::DoNotOptimize(w.run_round(0, chain, sp, ap, 0).consensus_score);
    }
}
BENCHMARK(BM_AggregationRound)->Arg(4)->Arg(32);

} // namespace

BENCHMARK_MAIN();
