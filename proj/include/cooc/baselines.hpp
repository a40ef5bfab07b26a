#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cooc/corpus.hpp"

namespace cooc {

/// Item co-occurrence graph in compressed sparse rows. counts(i, j) is the
/// number of records holding both i and j; the diagonal is empty.
struct CovisitGraph {
    std::size_t n_items = 0;
    std::vector<std::size_t> row_start;  // n_items + 1 offsets
    std::vector<ItemId> neighbour;
    std::vector<std::uint32_t> weight;
    std::vector<std::uint64_t> item_freq;  // records containing each item
    std::vector<std::uint64_t> degree;     // sum of a row's counts

    std::uint64_t count(ItemId i, ItemId j) const;
    std::span<const ItemId> neighbours(ItemId i) const
    {
        return {neighbour.data() + row_start[i], row_start[i + 1] - row_start[i]};
    }
    std::span<const std::uint32_t> weights(ItemId i) const
    {
        return {weight.data() + row_start[i], row_start[i + 1] - row_start[i]};
    }
};

CovisitGraph build_covisit(const Corpus& corpus);

enum class CovisitNorm { Cosine, Target, Source };
CovisitNorm parse_covisit_norm(const std::string& s);

enum class WalkAggregate { Cumulative, FinalStep };

double cvg_score(const CovisitGraph& g, const ItemSet& context, ItemId t);
double normcvg_score(const CovisitGraph& g, const ItemSet& context, ItemId t, CovisitNorm norm = CovisitNorm::Cosine);
/// sum_{i in context} sum_{s=1..steps} [P^s](i, t) with P the row-normalised
/// counts (zero rows for isolated items). FinalStep keeps only s = steps.
double lrw_score(const CovisitGraph& g, const ItemSet& context, ItemId t, std::size_t steps,
                 WalkAggregate aggregate = WalkAggregate::Cumulative);

// Scores of every item at once (out.size() == n_items); non-context entries
// equal the single-item functions bitwise.
void cvg_score_items(const CovisitGraph& g, std::span<const ItemId> context, std::span<double> out);
void normcvg_score_items(const CovisitGraph& g, std::span<const ItemId> context, std::span<double> out,
                         CovisitNorm norm = CovisitNorm::Cosine);
void lrw_score_items(const CovisitGraph& g, std::span<const ItemId> context, std::span<double> out, std::size_t steps,
                     WalkAggregate aggregate = WalkAggregate::Cumulative);

}  // namespace cooc
