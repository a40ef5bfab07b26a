#include "cooc/scorers.hpp"

#include <algorithm>
#include <cmath>

namespace cooc {

bool PairParams::is_symmetric() const
{
    for (std::size_t i = 0; i < pair.rows; ++i)
        for (std::size_t j = i + 1; j < pair.cols; ++j)
            if (pair(i, j) != pair(j, i))
                return false;
    return true;
}

std::vector<std::size_t> DemParams::layer_sizes() const
{
    std::vector<std::size_t> sizes;
    for (const auto& layer : layers)
        sizes.push_back(layer.bias.size());
    return sizes;
}

DemParams DemParams::zeros(std::size_t n_items, std::span<const std::size_t> layer_sizes)
{
    DemParams p;
    p.bias.assign(n_items, 0.0);
    p.pair_readout = Matrix(n_items, n_items);
    std::size_t fan_in = n_items;
    for (std::size_t h : layer_sizes) {
        p.layers.push_back(DenseLayer{Matrix(fan_in, h), std::vector<double>(h, 0.0)});
        p.readouts.emplace_back(n_items, h);
        fan_in = h;
    }
    return p;
}

std::vector<std::span<double>> DemParams::tensors()
{
    std::vector<std::span<double>> out{bias, pair_readout.data};
    for (auto& layer : layers) {
        out.emplace_back(layer.weight.data);
        out.emplace_back(layer.bias);
    }
    for (auto& r : readouts)
        out.emplace_back(r.data);
    return out;
}

std::vector<std::span<const double>> DemParams::tensors() const
{
    std::vector<std::span<const double>> out{bias, pair_readout.data};
    for (const auto& layer : layers) {
        out.emplace_back(layer.weight.data);
        out.emplace_back(layer.bias);
    }
    for (const auto& r : readouts)
        out.emplace_back(r.data);
    return out;
}

std::size_t DemParams::parameter_count() const
{
    std::size_t n = 0;
    for (auto t : tensors())
        n += t.size();
    return n;
}

void validate(const DemParams& p)
{
    const std::size_t n = p.n_items();
    if (p.pair_readout.rows != n || p.pair_readout.cols != n)
        throw ContractError("DemParams: pair_readout must be N x N");
    for (std::size_t i = 0; i < n; ++i)
        if (p.pair_readout(i, i) != 0.0)
            throw ContractError("DemParams: pair_readout diagonal must be zero");
    if (p.readouts.size() != p.layers.size())
        throw ContractError("DemParams: one readout per layer required");
    std::size_t fan_in = n;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& layer = p.layers[l];
        const std::size_t h = layer.bias.size();
        if (layer.weight.rows != fan_in || layer.weight.cols != h)
            throw ContractError("DemParams: layer " + std::to_string(l + 1) + " weight shape does not chain");
        if (p.readouts[l].rows != n || p.readouts[l].cols != h)
            throw ContractError("DemParams: readout " + std::to_string(l + 1) + " must be N x H");
        fan_in = h;
    }
}

ModelKind parse_model_kind(const std::string& name)
{
    if (name == "l1")
        return ModelKind::L1;
    if (name == "fvbm")
        return ModelKind::Fvbm;
    if (name == "lbl")
        return ModelKind::Lbl;
    if (name == "dem")
        return ModelKind::Dem;
    throw std::invalid_argument("unknown model '" + name + "' (expected dem, fvbm, l1 or lbl)");
}

std::string model_kind_name(ModelKind kind)
{
    switch (kind) {
    case ModelKind::L1: return "l1";
    case ModelKind::Fvbm: return "fvbm";
    case ModelKind::Lbl: return "lbl";
    case ModelKind::Dem: return "dem";
    }
    return "unknown";
}

ModelKind kind_of(const Model& model)
{
    return static_cast<ModelKind>(model.index());
}

std::size_t n_items(const Model& model)
{
    return std::visit([](const auto& p) { return p.n_items(); }, model);
}

double sigmoid(double x)
{
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log_sigmoid(double x)
{
    if (x >= 0.0)
        return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

HiddenState dem_forward(const DemParams& params, std::span<const ItemId> context)
{
    HiddenState state;
    state.activations.reserve(params.layers.size());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        std::vector<double> pre = layer.bias;
        if (l == 0) {
            for (ItemId i : context) {
                auto w = layer.weight.row(i);
                for (std::size_t o = 0; o < pre.size(); ++o)
                    pre[o] += w[o];
            }
        } else {
            const auto& below = state.activations.back();
            for (std::size_t j = 0; j < below.size(); ++j) {
                auto w = layer.weight.row(j);
                const double x = below[j];
                for (std::size_t o = 0; o < pre.size(); ++o)
                    pre[o] += x * w[o];
            }
        }
        for (double& v : pre)
            v = sigmoid(v);
        state.activations.push_back(std::move(pre));
    }
    return state;
}

double dem_score(const DemParams& params, ItemId t, std::span<const ItemId> context, const HiddenState& hidden)
{
    double s = params.bias[t];
    for (ItemId i : context)
        s += params.pair_readout(i, t);
    for (std::size_t l = 0; l < params.readouts.size(); ++l)
        s += dot(params.readouts[l].row(t), hidden.activations[l]);
    return s;
}

double score_unchecked(const BiasParams& params, ItemId t, std::span<const ItemId>)
{
    return params.bias[t];
}

double score_unchecked(const PairParams& params, ItemId t, std::span<const ItemId> context)
{
    double s = params.bias[t];
    for (ItemId i : context)
        s += params.pair(i, t);
    return s;
}

namespace {

std::vector<double> context_embedding_sum(const LblParams& params, std::span<const ItemId> context)
{
    std::vector<double> u(params.embed.cols, 0.0);
    for (ItemId i : context) {
        auto phi = params.embed.row(i);
        for (std::size_t k = 0; k < u.size(); ++k)
            u[k] += phi[k];
    }
    return u;
}

double lbl_score(const LblParams& params, ItemId t, std::span<const double> u)
{
    double s = params.use_bias ? params.bias[t] : 0.0;
    s += dot(params.embed.row(t), u);
    return s;
}

void check_query(std::size_t n, ItemId t, const ItemSet& context)
{
    if (t >= n)
        throw ContractError("target " + std::to_string(t) + " out of range [0, " + std::to_string(n) + ")");
    if (context.contains(t))
        throw ContractError("target " + std::to_string(t) + " is part of the context");
    if (!context.empty() && context.items().back() >= n)
        throw ContractError("context holds an out-of-range item");
}

}  // namespace

double score_unchecked(const LblParams& params, ItemId t, std::span<const ItemId> context)
{
    const auto u = context_embedding_sum(params, context);
    return lbl_score(params, t, u);
}

double score_unchecked(const DemParams& params, ItemId t, std::span<const ItemId> context)
{
    return dem_score(params, t, context, dem_forward(params, context));
}

double score(const BiasParams& params, ItemId t, const ItemSet& context)
{
    check_query(params.n_items(), t, context);
    return score_unchecked(params, t, context.view());
}

double score(const PairParams& params, ItemId t, const ItemSet& context)
{
    check_query(params.n_items(), t, context);
    return score_unchecked(params, t, context.view());
}

double score(const LblParams& params, ItemId t, const ItemSet& context)
{
    check_query(params.n_items(), t, context);
    return score_unchecked(params, t, context.view());
}

double score(const DemParams& params, ItemId t, const ItemSet& context)
{
    check_query(params.n_items(), t, context);
    return score_unchecked(params, t, context.view());
}

double score(const Model& model, ItemId t, const ItemSet& context)
{
    return std::visit([&](const auto& p) { return score(p, t, context); }, model);
}

std::vector<double> score_all(const Model& model, const ItemSet& context, std::span<const ItemId> candidates)
{
    const std::size_t n = n_items(model);
    for (ItemId t : candidates)
        check_query(n, t, context);
    std::vector<double> out;
    out.reserve(candidates.size());
    const auto ctx = context.view();
    if (const auto* dem = std::get_if<DemParams>(&model)) {
        const HiddenState hidden = dem_forward(*dem, ctx);
        for (ItemId t : candidates)
            out.push_back(dem_score(*dem, t, ctx, hidden));
    } else if (const auto* lbl = std::get_if<LblParams>(&model)) {
        const auto u = context_embedding_sum(*lbl, ctx);
        for (ItemId t : candidates)
            out.push_back(lbl_score(*lbl, t, u));
    } else {
        for (ItemId t : candidates)
            out.push_back(std::visit([&](const auto& p) { return score_unchecked(p, t, ctx); }, model));
    }
    return out;
}

void score_every_item(const Model& model, std::span<const ItemId> context, std::span<double> out)
{
    struct Visitor {
        std::span<const ItemId> ctx;
        std::span<double> out;

        void operator()(const BiasParams& p) const { std::copy(p.bias.begin(), p.bias.end(), out.begin()); }
        void operator()(const PairParams& p) const
        {
            std::copy(p.bias.begin(), p.bias.end(), out.begin());
            for (ItemId i : ctx) {
                auto row = p.pair.row(i);
                for (std::size_t t = 0; t < out.size(); ++t)
                    out[t] += row[t];
            }
        }
        void operator()(const LblParams& p) const
        {
            const auto u = context_embedding_sum(p, ctx);
            for (std::size_t t = 0; t < out.size(); ++t)
                out[t] = lbl_score(p, static_cast<ItemId>(t), u);
        }
        void operator()(const DemParams& p) const
        {
            std::copy(p.bias.begin(), p.bias.end(), out.begin());
            for (ItemId i : ctx) {
                auto row = p.pair_readout.row(i);
                for (std::size_t t = 0; t < out.size(); ++t)
                    out[t] += row[t];
            }
            const HiddenState hidden = dem_forward(p, ctx);
            for (std::size_t l = 0; l < p.readouts.size(); ++l) {
                const auto& h = hidden.activations[l];
                for (std::size_t t = 0; t < out.size(); ++t)
                    out[t] += dot(p.readouts[l].row(t), h);
            }
        }
    };
    if (out.size() != n_items(model))
        throw ContractError("score_every_item: output size must equal the item count");
    std::visit(Visitor{context, out}, model);
}

double conditional_probability(const Model& model, ItemId t, const ItemSet& context)
{
    return sigmoid(score(model, t, context));
}

double explicit_energy(const BiasParams& params, const ItemSet& v)
{
    double e = 0.0;
    for (ItemId i : v)
        e -= params.bias[i];
    return e;
}

double explicit_energy(const PairParams& params, const ItemSet& v)
{
    if (!params.is_symmetric())
        throw ContractError("explicit_energy: pair weights are not symmetric");
    double e = 0.0;
    for (ItemId i : v)
        e -= params.bias[i];
    for (std::size_t a = 0; a < v.size(); ++a)
        for (std::size_t b = a + 1; b < v.size(); ++b)
            e -= params.pair(v[a], v[b]);
    return e;
}

double oracle_conditional(const BiasParams& params, ItemId t, const ItemSet& context)
{
    return sigmoid(explicit_energy(params, context) - explicit_energy(params, context.with(t)));
}

double oracle_conditional(const PairParams& params, ItemId t, const ItemSet& context)
{
    return sigmoid(explicit_energy(params, context) - explicit_energy(params, context.with(t)));
}

DemParams dem_from_fvbm(const PairParams& fvbm)
{
    DemParams dem;
    dem.bias = fvbm.bias;
    dem.pair_readout = fvbm.pair;
    return dem;
}

}  // namespace cooc
