#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cooc/training.hpp"
#include "oracles.hpp"
#include "random_models.hpp"

using namespace cooc;

namespace {

Hyperparams hyper_with_layers(std::vector<std::size_t> layers, std::uint64_t seed = 1)
{
    Hyperparams h;
    h.layer_sizes = std::move(layers);
    h.seed = seed;
    return h;
}

Corpus random_corpus(std::size_t n, std::size_t records, std::uint64_t seed, double density = 0.3)
{
    Rng rng(seed);
    Corpus c;
    c.n_items = n;
    while (c.records.size() < records) {
        ItemSet r = fixtures::random_context(n, static_cast<ItemId>(n), rng, density);
        if (!r.empty())
            c.records.push_back(std::move(r));
    }
    return c;
}

}  // namespace

TEST(InitParams, ZeroLayersIsFvbmShaped)
{
    const DemParams p = init_params(7, hyper_with_layers({}));
    EXPECT_TRUE(p.layers.empty());
    EXPECT_TRUE(p.readouts.empty());
    EXPECT_EQ(p.pair_readout, Matrix(7, 7));
    EXPECT_EQ(p.bias, std::vector<double>(7, 0.0));
}

TEST(InitParams, ZeroScaleGivesHalfProbabilities)
{
    Hyperparams h = hyper_with_layers({5, 3});
    h.init_scale = 0.0;
    const DemParams p = init_params(6, h);
    for (auto t : p.tensors())
        for (double x : t)
            EXPECT_EQ(x, 0.0);
    EXPECT_EQ(conditional_probability(Model{p}, 2, ItemSet::from_sorted({0, 4})), 0.5);
}

TEST(InitParams, DeterministicAndBounded)
{
    const Hyperparams h = hyper_with_layers({5, 3}, 99);
    const DemParams a = init_params(10, h);
    EXPECT_EQ(a, init_params(10, h));
    EXPECT_NE(a, init_params(10, hyper_with_layers({5, 3}, 100)));
    const double bound = std::sqrt(6.0 / (10 + 5));
    for (double w : a.layers[0].weight.data)
        EXPECT_LE(std::abs(w), bound);
    EXPECT_TRUE(std::any_of(a.layers[0].weight.data.begin(), a.layers[0].weight.data.end(),
                            [&](double w) { return std::abs(w) > bound / 2; }));
    for (double b : a.layers[1].bias)
        EXPECT_EQ(b, 0.0);
}

TEST(SampleNegatives, ComplementMembership)
{
    Rng rng(1);
    const ItemSet r = ItemSet::from_sorted({0, 1});
    for (int k = 0; k < 200; ++k)
        for (ItemId t : sample_negatives(r, 2, 5, rng)) {
            EXPECT_GE(t, 2u);
            EXPECT_LT(t, 5u);
        }
    EXPECT_TRUE(sample_negatives(r, 0, 5, rng).empty());
}

TEST(SampleNegatives, DenseRecordUsesComplement)
{
    Rng rng(2);
    const ItemSet r = ItemSet::from_sorted({0, 1, 2, 3, 5, 6, 7, 8, 9});
    for (ItemId t : sample_negatives(r, 50, 10, rng))
        EXPECT_EQ(t, 4u);
}

TEST(SampleNegatives, EmptyComplementThrows)
{
    Rng rng(3);
    EXPECT_THROW(sample_negatives(ItemSet::from_sorted({0, 1}), 1, 2, rng), std::invalid_argument);
}

TEST(SampleNegatives, Uniform)
{
    Rng rng(4);
    std::map<ItemId, int> freq;
    constexpr int kDraws = 100000;
    for (ItemId t : sample_negatives(ItemSet::from_sorted({0}), kDraws, 4, rng))
        ++freq[t];
    EXPECT_EQ(freq.count(0), 0u);
    for (ItemId t : {1, 2, 3})
        EXPECT_NEAR(freq[t] / static_cast<double>(kDraws), 1.0 / 3.0, 0.02);
}

TEST(PerExampleLoss, ZeroParams)
{
    const std::vector<ItemId> neg{3};
    const Model m{DemParams::zeros(5, std::vector<std::size_t>{4})};
    EXPECT_NEAR(per_example_loss(m, ItemSet::from_sorted({0, 1}), neg), 3.0 * std::log(2.0), 1e-15);
    EXPECT_NEAR(3.0 * std::log(2.0), 2.0794, 1e-4);
}

TEST(PerExampleLoss, Saturation)
{
    const BiasParams p{{50.0, 50.0, -50.0}};
    const std::vector<ItemId> neg{2};
    const double loss = per_example_loss(Model{p}, ItemSet::from_sorted({0, 1}), neg);
    EXPECT_GE(loss, 0.0);
    EXPECT_LT(loss, 1e-20);
}

TEST(PerExampleLoss, OverlapThrows)
{
    const std::vector<ItemId> neg{1};
    EXPECT_THROW(per_example_loss(Model{BiasParams{{0, 0, 0}}}, ItemSet::from_sorted({0, 1}), neg), ContractError);
}

TEST(PerExampleLoss, MatchesIndependentEvaluation)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const GradientInstance g = make_gradient_instance(15, std::vector<std::size_t>{6, 3}, 4, seed);
        EXPECT_NEAR(per_example_loss(g.params, g.record, g.negatives),
                    oracle::dem_loss_dense(g.params, g.record, g.negatives), 1e-12);
    }
}

TEST(PerExampleLoss, InvariantUnderRelabeling)
{
    const std::size_t n = 12;
    const GradientInstance g = make_gradient_instance(n, std::vector<std::size_t>{5, 3}, 4, 7);
    std::vector<ItemId> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    Rng rng(8);
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_index(i + 1)]);

    DemParams q = g.params;
    for (std::size_t i = 0; i < n; ++i) {
        q.bias[perm[i]] = g.params.bias[i];
        for (std::size_t j = 0; j < n; ++j)
            q.pair_readout(perm[i], perm[j]) = g.params.pair_readout(i, j);
        for (std::size_t o = 0; o < q.layers[0].bias.size(); ++o)
            q.layers[0].weight(perm[i], o) = g.params.layers[0].weight(i, o);
        for (std::size_t l = 0; l < q.readouts.size(); ++l)
            for (std::size_t o = 0; o < q.readouts[l].cols; ++o)
                q.readouts[l](perm[i], o) = g.params.readouts[l](i, o);
    }
    std::vector<ItemId> rec, neg;
    for (ItemId i : g.record)
        rec.push_back(perm[i]);
    for (ItemId i : g.negatives)
        neg.push_back(perm[i]);
    EXPECT_NEAR(per_example_loss(q, make_itemset(rec, n), neg), per_example_loss(g.params, g.record, g.negatives),
                1e-12);
}

TEST(SgdUpdate, ZeroLayerSinglePositive)
{
    DemParams p = DemParams::zeros(4, std::vector<std::size_t>{});
    StepOptions opt;
    opt.learning_rate = 0.1;
    sgd_update(p, ItemSet::from_sorted({2}), {}, opt);
    EXPECT_EQ(p.bias[2], 0.1 * 0.5);
    EXPECT_EQ(p.bias[0], 0.0);
}

TEST(SgdUpdate, DescentOnOwnLoss)
{
    for (double eta : {1e-3, 1e-4}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            GradientInstance g = make_gradient_instance(20, std::vector<std::size_t>{8, 4}, 5, seed);
            const double before = per_example_loss(g.params, g.record, g.negatives);
            StepOptions opt;
            opt.learning_rate = eta;
            sgd_update(g.params, g.record, g.negatives, opt);
            EXPECT_LT(per_example_loss(g.params, g.record, g.negatives), before) << "eta=" << eta;
        }
    }
}

TEST(SgdUpdate, DescentForEveryModelKind)
{
    const ItemSet record = ItemSet::from_sorted({1, 4, 6});
    const std::vector<ItemId> neg{0, 9};
    Hyperparams h = hyper_with_layers({4});
    h.embedding_dim = 3;
    for (ModelKind kind : {ModelKind::L1, ModelKind::Fvbm, ModelKind::Lbl, ModelKind::Dem}) {
        Model m = init_model(kind, 12, h);
        const double before = per_example_loss(m, record, neg);
        sgd_update(m, record, neg, step_options(h, 1e-3, kind));
        EXPECT_LT(per_example_loss(m, record, neg), before) << model_kind_name(kind);
    }
}

TEST(SgdUpdate, TouchesOnlyExpectedEntries)
{
    Rng rng(31);
    DemParams p = fixtures::random_dem(10, {4, 3}, rng);
    const DemParams before = p;
    const ItemSet record = ItemSet::from_sorted({1, 3, 5});
    const std::vector<ItemId> neg{7};
    StepOptions opt;
    opt.learning_rate = 0.1;
    opt.weight_decay = 1e-3;
    sgd_update(p, record, neg, opt);

    const std::vector<ItemId> targets{1, 3, 5, 7};
    auto is_target = [&](std::size_t t) { return std::find(targets.begin(), targets.end(), t) != targets.end(); };
    for (std::size_t t = 0; t < 10; ++t) {
        if (!is_target(t)) {
            EXPECT_EQ(p.bias[t], before.bias[t]);
            for (const auto& r : {0, 1})
                for (std::size_t o = 0; o < p.readouts[r].cols; ++o)
                    EXPECT_EQ(p.readouts[r](t, o), before.readouts[r](t, o));
        } else {
            EXPECT_NE(p.bias[t], before.bias[t]);
        }
        for (std::size_t i = 0; i < 10; ++i) {
            const bool may_change = is_target(t) && record.contains(static_cast<ItemId>(i)) && i != t;
            if (!may_change)
                EXPECT_EQ(p.pair_readout(i, t), before.pair_readout(i, t)) << i << "," << t;
            else
                EXPECT_NE(p.pair_readout(i, t), before.pair_readout(i, t)) << i << "," << t;
        }
    }
    EXPECT_NE(p.layers[1].weight, before.layers[1].weight);
    EXPECT_NE(p.layers[0].bias, before.layers[0].bias);
}

TEST(SgdUpdate, TiedFvbmStaysSymmetric)
{
    const Corpus c = random_corpus(8, 50, 2);
    TrainConfig cfg;
    cfg.kind = ModelKind::Fvbm;
    cfg.hyper.epochs = 2;
    const TrainResult r = train(c, cfg);
    EXPECT_TRUE(std::get<PairParams>(r.model).is_symmetric());
}

TEST(GradientCheck, TwoLayerDem)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const GradientInstance g = make_gradient_instance(20, std::vector<std::size_t>{8, 4}, 5, seed);
        EXPECT_LE(gradient_check(g.params, g.record, g.negatives, 1e-5), 1e-4);
    }
}

TEST(GradientCheck, ZeroLayerNearlyExact)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const GradientInstance g = make_gradient_instance(20, std::vector<std::size_t>{}, 5, seed);
        EXPECT_LE(gradient_check(g.params, g.record, g.negatives, 1e-5), 1e-8);
    }
}

TEST(GradientCheck, CorruptedRecursionFails)
{
    const GradientInstance g = make_gradient_instance(20, std::vector<std::size_t>{8, 4}, 5, 0);
    EXPECT_GT(gradient_check(g.params, g.record, g.negatives, 1e-5, true), 1e-2);
}

TEST(GradientCheck, EpsilonDomain)
{
    const GradientInstance g = make_gradient_instance(6, std::vector<std::size_t>{2}, 1, 0);
    EXPECT_THROW(gradient_check(g.params, g.record, g.negatives, 1e-2), std::invalid_argument);
    EXPECT_THROW(gradient_check(g.params, g.record, g.negatives, 1e-9), std::invalid_argument);
}

TEST(BackpropMessages, ShapesMatchLayers)
{
    const GradientInstance g = make_gradient_instance(10, std::vector<std::size_t>{5, 3}, 1, 2);
    const HiddenState h = dem_forward(g.params, g.record);
    const BackpropMessages m = backprop_messages(g.params, 0, h, 0.7);
    ASSERT_EQ(m.lambda.size(), 2u);
    EXPECT_EQ(m.lambda[0].size(), 5u);
    EXPECT_EQ(m.lambda[1].size(), 3u);
    for (std::size_t o = 0; o < 3; ++o)
        EXPECT_EQ(m.lambda[1][o], 0.7 * g.params.readouts[1](0, o));
}

TEST(Train, ZeroEpochsReturnsInit)
{
    const Corpus c = random_corpus(9, 20, 1);
    TrainConfig cfg;
    cfg.hyper = hyper_with_layers({4});
    cfg.hyper.epochs = 0;
    const TrainResult r = train(c, cfg);
    EXPECT_TRUE(r.trace.epoch_losses.empty());
    EXPECT_TRUE(r.trace.wall_times.empty());
    EXPECT_EQ(r.model, init_model(ModelKind::Dem, 9, cfg.hyper));
}

TEST(Train, DeterministicGivenSeed)
{
    const Corpus c = random_corpus(15, 60, 4);
    for (ModelKind kind : {ModelKind::L1, ModelKind::Fvbm, ModelKind::Lbl, ModelKind::Dem}) {
        TrainConfig cfg;
        cfg.kind = kind;
        cfg.hyper = hyper_with_layers({6, 3}, 12);
        cfg.hyper.epochs = 3;
        cfg.hyper.embedding_dim = 4;
        const TrainResult a = train(c, cfg);
        const TrainResult b = train(c, cfg);
        EXPECT_EQ(a.model, b.model) << model_kind_name(kind);
        EXPECT_EQ(a.trace.epoch_losses, b.trace.epoch_losses);
        EXPECT_EQ(a.trace.epoch_losses.size(), 3u);
        cfg.hyper.seed = 13;
        EXPECT_NE(train(c, cfg).model, a.model);
    }
}

TEST(Train, EpochCallback)
{
    const Corpus c = random_corpus(6, 10, 5);
    TrainConfig cfg;
    cfg.kind = ModelKind::L1;
    cfg.hyper.epochs = 4;
    std::vector<std::size_t> seen;
    cfg.on_epoch = [&](std::size_t e, double) { seen.push_back(e); };
    train(c, cfg);
    EXPECT_EQ(seen, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Train, Dem0MatchesUntiedFvbmTrajectory)
{
    const Corpus c = random_corpus(14, 80, 6);
    Hyperparams h = hyper_with_layers({}, 21);
    h.epochs = 3;
    h.fvbm_tied = false;
    Rng rng(1);
    const PairParams start = fixtures::random_fvbm(14, rng, false);

    TrainConfig fcfg{ModelKind::Fvbm, h, {}};
    TrainConfig dcfg{ModelKind::Dem, h, {}};
    const TrainResult f = train_from(Model{start}, c, fcfg);
    const TrainResult d = train_from(Model{dem_from_fvbm(start)}, c, dcfg);
    const auto& fp = std::get<PairParams>(f.model);
    const auto& dp = std::get<DemParams>(d.model);
    EXPECT_EQ(fp.bias, dp.bias);
    EXPECT_EQ(fp.pair, dp.pair_readout);
    EXPECT_EQ(f.trace.epoch_losses, d.trace.epoch_losses);
}

TEST(Train, L1ConvergesToItemFrequency)
{
    // Independent Bernoulli items with distinct rates.
    const std::size_t n = 10;
    Rng rng(77);
    Corpus c;
    c.n_items = n;
    while (c.records.size() < 4000) {
        std::vector<ItemId> ids;
        for (ItemId i = 0; i < n; ++i)
            if (rng.uniform_unit() < 0.15 + 0.07 * i)
                ids.push_back(i);
        if (!ids.empty())
            c.records.push_back(ItemSet::from_sorted(std::move(ids)));
    }
    TrainConfig cfg;
    cfg.kind = ModelKind::L1;
    cfg.hyper.reweight_negatives = true;
    cfg.hyper.learning_rate = 0.02;
    cfg.hyper.lr_decay = 0.8;
    cfg.hyper.epochs = 15;
    const TrainResult r = train(c, cfg);
    const auto& b = std::get<BiasParams>(r.model);
    for (ItemId t = 0; t < n; ++t) {
        std::size_t count = 0;
        for (const auto& rec : c.records)
            count += rec.contains(t);
        EXPECT_NEAR(sigmoid(b.bias[t]), count / static_cast<double>(c.records.size()), 0.02) << "item " << t;
    }
}

TEST(Hyperparams, Validation)
{
    Hyperparams h;
    EXPECT_NO_THROW(validate(h));
    h.learning_rate = 0.0;
    EXPECT_THROW(validate(h), std::invalid_argument);
    h = Hyperparams{};
    h.lr_decay = 1.5;
    EXPECT_THROW(validate(h), std::invalid_argument);
    h = Hyperparams{};
    h.layer_sizes = {4, 0};
    EXPECT_THROW(validate(h), std::invalid_argument);
    h = Hyperparams{};
    h.weight_decay = -1.0;
    EXPECT_THROW(validate(h), std::invalid_argument);
}
