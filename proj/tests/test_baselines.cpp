#include <gtest/gtest.h>

#include <cmath>

#include "cooc/baselines.hpp"
#include "cooc/eval.hpp"

using namespace cooc;

namespace {

Corpus make_corpus(std::size_t n, std::vector<std::vector<ItemId>> records)
{
    Corpus c;
    c.n_items = n;
    for (auto& r : records)
        c.records.push_back(make_itemset(r, n));
    return c;
}

// A=0, B=1, C=2: {A,B}, {A,B}, {A,C}
Corpus abc() { return make_corpus(3, {{0, 1}, {0, 1}, {0, 2}}); }

}  // namespace

TEST(BuildCovisit, HandCounts)
{
    const CovisitGraph g = build_covisit(abc());
    EXPECT_EQ(g.count(0, 1), 2u);
    EXPECT_EQ(g.count(0, 2), 1u);
    EXPECT_EQ(g.count(1, 2), 0u);
    EXPECT_EQ(g.item_freq, (std::vector<std::uint64_t>{3, 2, 1}));
    for (ItemId i = 0; i < 3; ++i) {
        EXPECT_EQ(g.count(i, i), 0u);
        for (ItemId j = 0; j < 3; ++j) {
            EXPECT_EQ(g.count(i, j), g.count(j, i));
            EXPECT_LE(g.count(i, j), std::min(g.item_freq[i], g.item_freq[j]));
        }
    }
}

TEST(BuildCovisit, SingletonsAndEmpty)
{
    const CovisitGraph g = build_covisit(make_corpus(3, {{0}, {1}, {2}}));
    EXPECT_TRUE(g.neighbour.empty());
    EXPECT_EQ(g.count(0, 1), 0u);
    const CovisitGraph e = build_covisit(Corpus{});
    EXPECT_EQ(e.n_items, 0u);
    EXPECT_TRUE(e.neighbour.empty());
}

TEST(BuildCovisit, SparsePathMatchesDensePath)
{
    // Above the dense-count threshold the builder switches representation.
    const std::size_t n = 5000;
    Corpus c;
    c.n_items = n;
    for (ItemId k = 0; k < 300; ++k)
        c.records.push_back(make_itemset(std::vector<ItemId>{k, static_cast<ItemId>(k + 4000), static_cast<ItemId>((k * 7) % n)}, n));
    const CovisitGraph g = build_covisit(c);
    for (const auto& r : c.records)
        for (ItemId i : r)
            for (ItemId j : r) {
                if (i == j)
                    continue;
                std::uint64_t expected = 0;
                for (const auto& s : c.records)
                    expected += s.contains(i) && s.contains(j);
                EXPECT_EQ(g.count(i, j), expected);
            }
}

TEST(Cvg, HandScores)
{
    const CovisitGraph g = build_covisit(abc());
    EXPECT_EQ(cvg_score(g, ItemSet::from_sorted({0}), 1), 2.0);
    EXPECT_EQ(cvg_score(g, ItemSet::from_sorted({0}), 2), 1.0);
    EXPECT_EQ(cvg_score(g, ItemSet::from_sorted({0, 1}), 2), 1.0);
    const CovisitGraph g4 = build_covisit(make_corpus(4, {{0, 1}, {2}}));
    EXPECT_EQ(cvg_score(g4, ItemSet::from_sorted({2}), 0), 0.0);
}

TEST(NormCvg, CosineHandScore)
{
    const CovisitGraph g = build_covisit(abc());
    EXPECT_NEAR(normcvg_score(g, ItemSet::from_sorted({0}), 1), 2.0 / std::sqrt(6.0), 1e-15);
    EXPECT_NEAR(normcvg_score(g, ItemSet::from_sorted({0}), 1), 0.8165, 1e-4);
    EXPECT_EQ(normcvg_score(g, ItemSet::from_sorted({1}), 2), 0.0);
    EXPECT_NEAR(normcvg_score(g, ItemSet::from_sorted({0}), 1, CovisitNorm::Target), 1.0, 1e-15);
    EXPECT_NEAR(normcvg_score(g, ItemSet::from_sorted({0}), 1, CovisitNorm::Source), 2.0 / 3.0, 1e-15);
}

TEST(NormCvg, ZeroFrequencyCandidate)
{
    const CovisitGraph g = build_covisit(make_corpus(3, {{0, 1}}));
    EXPECT_EQ(normcvg_score(g, ItemSet::from_sorted({0}), 2), 0.0);
}

TEST(NormCvg, SameRankingAsCvgUnderUniformFrequency)
{
    // Every item occurs in exactly two records.
    const Corpus c = make_corpus(6, {{0, 1, 2}, {3, 4, 5}, {0, 1, 3}, {2, 4, 5}});
    const CovisitGraph g = build_covisit(c);
    BaselineScorer cvg(g, BaselineConfig{BaselineKind::Cvg});
    BaselineScorer norm(g, BaselineConfig{BaselineKind::NormCvg});
    for (ItemId i = 0; i < 6; ++i) {
        const ItemSet ctx = ItemSet::from_sorted({i});
        EXPECT_EQ(rank_candidates(cvg, ctx, 5).items, rank_candidates(norm, ctx, 5).items);
    }
}

TEST(Lrw, OneStepHandScores)
{
    const CovisitGraph g = build_covisit(make_corpus(4, {{1, 2}, {1, 2}, {1, 3}}));
    const ItemSet ctx = ItemSet::from_sorted({1});
    EXPECT_NEAR(lrw_score(g, ctx, 2, 1), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(lrw_score(g, ctx, 3, 1), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(lrw_score(g, ctx, 0, 3), 0.0);
}

TEST(Lrw, OneStepIsCountOverDegree)
{
    const Corpus c = make_corpus(7, {{0, 1, 2}, {1, 3}, {2, 3, 4}, {0, 4, 5}, {1, 2}});
    const CovisitGraph g = build_covisit(c);
    const ItemSet ctx = ItemSet::from_sorted({1, 4});
    for (ItemId t : {0, 2, 3, 5, 6}) {
        double expected = 0.0;
        for (ItemId i : ctx)
            expected += static_cast<double>(g.count(i, t)) / static_cast<double>(g.degree[i]);
        EXPECT_EQ(lrw_score(g, ctx, t, 1), expected);
    }
}

TEST(Lrw, TransitionRowsSumToOneOrZero)
{
    const Corpus c = make_corpus(7, {{0, 1, 2}, {1, 3}, {2, 3, 4}, {0, 4, 5}, {1, 2}});
    const CovisitGraph g = build_covisit(c);
    for (ItemId i = 0; i < 7; ++i) {
        std::vector<double> out(7);
        lrw_score_items(g, std::vector<ItemId>{i}, out, 1);
        double sum = 0.0;
        for (ItemId t = 0; t < 7; ++t)
            sum += out[t];
        EXPECT_NEAR(sum, g.degree[i] > 0 ? 1.0 : 0.0, 1e-12) << "row " << i;
    }
}

TEST(Lrw, CumulativeIsSumOfFinalSteps)
{
    const Corpus c = make_corpus(6, {{0, 1, 2}, {1, 3}, {2, 3, 4}, {0, 4, 5}});
    const CovisitGraph g = build_covisit(c);
    const ItemSet ctx = ItemSet::from_sorted({0});
    for (ItemId t : {1, 2, 3, 4, 5}) {
        double sum = 0.0;
        for (std::size_t s = 1; s <= 3; ++s)
            sum += lrw_score(g, ctx, t, s, WalkAggregate::FinalStep);
        EXPECT_NEAR(lrw_score(g, ctx, t, 3), sum, 1e-14);
    }
}

TEST(Lrw, ProportionalToCvgForEqualDegrees)
{
    const Corpus c = make_corpus(5, {{0, 2}, {1, 3}, {0, 4}, {1, 4}});
    const CovisitGraph g = build_covisit(c);
    ASSERT_EQ(g.degree[0], g.degree[1]);
    const ItemSet ctx = ItemSet::from_sorted({0, 1});
    for (ItemId t : {2, 3, 4})
        EXPECT_NEAR(lrw_score(g, ctx, t, 1), cvg_score(g, ctx, t) / static_cast<double>(g.degree[0]), 1e-15);
}

TEST(ScoreItems, MatchesSingleItemFunctions)
{
    const Corpus c = make_corpus(6, {{0, 1, 2}, {1, 3}, {2, 3, 4}, {0, 4, 5}});
    const CovisitGraph g = build_covisit(c);
    const ItemSet ctx = ItemSet::from_sorted({1, 4});
    std::vector<double> a(6), b(6), d(6);
    cvg_score_items(g, ctx.view(), a);
    normcvg_score_items(g, ctx.view(), b);
    lrw_score_items(g, ctx.view(), d, 3);
    for (ItemId t : {0, 2, 3, 5}) {
        EXPECT_EQ(a[t], cvg_score(g, ctx, t));
        EXPECT_EQ(b[t], normcvg_score(g, ctx, t));
        EXPECT_EQ(d[t], lrw_score(g, ctx, t, 3));
    }
}

TEST(CovisitNorm, Parse)
{
    EXPECT_EQ(parse_covisit_norm("cosine"), CovisitNorm::Cosine);
    EXPECT_EQ(parse_covisit_norm("target"), CovisitNorm::Target);
    EXPECT_EQ(parse_covisit_norm("source"), CovisitNorm::Source);
    EXPECT_THROW(parse_covisit_norm("l2"), std::invalid_argument);
}
