// Serial reference vs OpenMP kernels. Thread count is the benchmark argument.

#include <benchmark/benchmark.h>

#include <algorithm>

#include "cooc/eval.hpp"
#include "cooc/kernels.hpp"
#include "cooc/training.hpp"

using namespace cooc;

namespace {

struct RankFixture {
    std::unique_ptr<ModelScorer> scorer;
    std::vector<MaskedRecord> masked;
};

const RankFixture& rank_fixture()
{
    static const RankFixture f = [] {
        Hyperparams h;
        h.layer_sizes = {64, 32};
        RankFixture out;
        out.scorer = std::make_unique<ModelScorer>(init_model(ModelKind::Dem, 500, h));
        Rng rng(3);
        for (int r = 0; r < 2000; ++r) {
            std::vector<ItemId> ids;
            while (ids.size() < 10) {
                const auto x = static_cast<ItemId>(rng.uniform_index(500));
                if (std::find(ids.begin(), ids.end(), x) == ids.end())
                    ids.push_back(x);
            }
            const ItemSet rec = make_itemset(ids, 500);
            out.masked.push_back(mask_one_item(rec, static_cast<std::uint64_t>(r)));
        }
        return out;
    }();
    return f;
}

void BM_TargetRanksSerial(benchmark::State& state)
{
    const auto& f = rank_fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::target_ranks_serial(*f.scorer, f.masked));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.masked.size()));
}

void BM_TargetRanksParallel(benchmark::State& state)
{
    const auto& f = rank_fixture();
    kernels::set_num_threads(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::target_ranks_parallel(*f.scorer, f.masked));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.masked.size()));
}

void BM_NumericGradientSerial(benchmark::State& state)
{
    const GradientInstance g = make_gradient_instance(20, std::vector<std::size_t>{8, 4}, 5, 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::numeric_gradient_serial(g.params, g.record, g.negatives, 1e-5));
}

void BM_NumericGradientParallel(benchmark::State& state)
{
    const GradientInstance g = make_gradient_instance(20, std::vector<std::size_t>{8, 4}, 5, 1);
    kernels::set_num_threads(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::numeric_gradient_parallel(g.params, g.record, g.negatives, 1e-5));
}

struct LossFixture {
    Model model;
    std::vector<ItemSet> records;
    std::vector<std::vector<ItemId>> negatives;
};

const LossFixture& loss_fixture()
{
    static const LossFixture f = [] {
        Hyperparams h;
        h.layer_sizes = {32};
        LossFixture out{init_model(ModelKind::Dem, 1000, h), {}, {}};
        Rng rng(9);
        for (int r = 0; r < 5000; ++r) {
            std::vector<ItemId> ids;
            for (int k = 0; k < 8; ++k)
                ids.push_back(static_cast<ItemId>(rng.uniform_index(1000)));
            ItemSet rec = make_itemset(ids, 1000);
            out.negatives.push_back(sample_negatives(rec, 5, 1000, rng));
            out.records.push_back(std::move(rec));
        }
        return out;
    }();
    return f;
}

void BM_ExampleLossesSerial(benchmark::State& state)
{
    const auto& f = loss_fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::example_losses_serial(f.model, f.records, f.negatives));
}

void BM_ExampleLossesParallel(benchmark::State& state)
{
    const auto& f = loss_fixture();
    kernels::set_num_threads(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::example_losses_parallel(f.model, f.records, f.negatives));
}

}  // namespace

BENCHMARK(BM_TargetRanksSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TargetRanksParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NumericGradientSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NumericGradientParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExampleLossesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExampleLossesParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
