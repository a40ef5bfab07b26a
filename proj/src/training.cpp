#include "cooc/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cooc/kernels.hpp"

namespace cooc {

void validate(const Hyperparams& h)
{
    if (!(h.learning_rate > 0.0) || !std::isfinite(h.learning_rate))
        throw std::invalid_argument("learning_rate must be positive");
    if (!(h.lr_decay >= 0.0 && h.lr_decay <= 1.0))
        throw std::invalid_argument("lr_decay must lie in [0, 1]");
    if (!(h.init_scale >= 0.0) || !std::isfinite(h.init_scale))
        throw std::invalid_argument("init_scale must be non-negative");
    if (!(h.weight_decay >= 0.0) || !std::isfinite(h.weight_decay))
        throw std::invalid_argument("weight_decay must be non-negative");
    for (std::size_t s : h.layer_sizes)
        if (s == 0)
            throw std::invalid_argument("layer sizes must be positive");
    if (h.embedding_dim == 0)
        throw std::invalid_argument("embedding_dim must be positive");
}

namespace {

void fill_uniform(std::span<double> values, double bound, Rng& rng)
{
    for (double& v : values)
        v = bound == 0.0 ? 0.0 : rng.uniform_real(-bound, bound);
}

double glorot_bound(double scale, std::size_t fan_in, std::size_t fan_out)
{
    return scale * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void check_negatives(const ItemSet& record, std::span<const ItemId> negatives, std::size_t n_items)
{
    for (ItemId t : negatives) {
        if (t >= n_items)
            throw ContractError("negative item " + std::to_string(t) + " out of range");
        if (record.contains(t))
            throw ContractError("negative item " + std::to_string(t) + " belongs to the record");
    }
}

// record with the k-th element removed, written into ctx.
void leave_one_out(const ItemSet& record, std::size_t k, std::vector<ItemId>& ctx)
{
    ctx.clear();
    for (std::size_t j = 0; j < record.size(); ++j)
        if (j != k)
            ctx.push_back(record[j]);
}

double term_loss(double s, bool positive)
{
    return positive ? -log_sigmoid(s) : -log_sigmoid(-s);
}

// e_l = lambda_l * h_l * (1 - h_l): the message at the pre-activation of layer l.
std::vector<std::vector<double>> preactivation_messages(const BackpropMessages& msgs, const HiddenState& hidden)
{
    std::vector<std::vector<double>> e(msgs.lambda.size());
    for (std::size_t l = 0; l < e.size(); ++l) {
        const auto& h = hidden.activations[l];
        e[l].resize(h.size());
        for (std::size_t o = 0; o < h.size(); ++o)
            e[l][o] = msgs.lambda[l][o] * h[o] * (1.0 - h[o]);
    }
    return e;
}

double dem_term(DemParams& p, ItemId t, std::span<const ItemId> ctx, bool positive, double weight,
                const StepOptions& opt)
{
    const HiddenState hidden = dem_forward(p, ctx);
    const double s = dem_score(p, t, ctx, hidden);
    const double delta = weight * ((positive ? 1.0 : 0.0) - sigmoid(s));
    const auto e = preactivation_messages(backprop_messages(p, t, hidden, delta, opt.drop_propagated_term), hidden);

    const double eta = opt.learning_rate;
    const double decay = 1.0 - eta * opt.weight_decay;

    p.bias[t] += eta * delta;
    for (ItemId i : ctx)
        p.pair_readout(i, t) = p.pair_readout(i, t) * decay + eta * delta;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto r = p.readouts[l].row(t);
        const auto& h = hidden.activations[l];
        for (std::size_t o = 0; o < r.size(); ++o)
            r[o] = r[o] * decay + eta * delta * h[o];
    }
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& layer = p.layers[l];
        const auto& el = e[l];
        if (l == 0) {
            for (ItemId i : ctx) {
                auto w = layer.weight.row(i);
                for (std::size_t o = 0; o < w.size(); ++o)
                    w[o] = w[o] * decay + eta * el[o];
            }
        } else {
            const auto& below = hidden.activations[l - 1];
            for (std::size_t j = 0; j < below.size(); ++j) {
                auto w = layer.weight.row(j);
                for (std::size_t o = 0; o < w.size(); ++o)
                    w[o] = w[o] * decay + eta * below[j] * el[o];
            }
        }
        for (std::size_t o = 0; o < el.size(); ++o)
            layer.bias[o] += eta * el[o];
    }
    return term_loss(s, positive);
}

void accumulate_term_gradient(const DemParams& p, DemParams& grad, ItemId t, std::span<const ItemId> ctx,
                              bool positive, bool drop)
{
    const HiddenState hidden = dem_forward(p, ctx);
    const double s = dem_score(p, t, ctx, hidden);
    // dloss/dscore = -(y - sigmoid(s))
    const double delta = (positive ? 1.0 : 0.0) - sigmoid(s);
    const auto e = preactivation_messages(backprop_messages(p, t, hidden, delta, drop), hidden);

    grad.bias[t] -= delta;
    for (ItemId i : ctx)
        grad.pair_readout(i, t) -= delta;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto r = grad.readouts[l].row(t);
        const auto& h = hidden.activations[l];
        for (std::size_t o = 0; o < r.size(); ++o)
            r[o] -= delta * h[o];
        auto& gl = grad.layers[l];
        if (l == 0) {
            for (ItemId i : ctx) {
                auto w = gl.weight.row(i);
                for (std::size_t o = 0; o < w.size(); ++o)
                    w[o] -= e[l][o];
            }
        } else {
            const auto& below = hidden.activations[l - 1];
            for (std::size_t j = 0; j < below.size(); ++j) {
                auto w = gl.weight.row(j);
                for (std::size_t o = 0; o < w.size(); ++o)
                    w[o] -= below[j] * e[l][o];
            }
        }
        for (std::size_t o = 0; o < e[l].size(); ++o)
            gl.bias[o] -= e[l][o];
    }
}

}  // namespace

DemParams init_params(std::size_t n_items, const Hyperparams& hyper)
{
    if (n_items == 0)
        throw std::invalid_argument("init_params: n_items must be at least 1");
    DemParams p = DemParams::zeros(n_items, hyper.layer_sizes);
    Rng rng(derive_seed(hyper.seed, "init"));
    std::size_t fan_in = n_items;
    for (auto& layer : p.layers) {
        const std::size_t fan_out = layer.bias.size();
        fill_uniform(layer.weight.data, glorot_bound(hyper.init_scale, fan_in, fan_out), rng);
        fan_in = fan_out;
    }
    for (auto& r : p.readouts)
        fill_uniform(r.data, glorot_bound(hyper.init_scale, r.cols, n_items), rng);
    return p;
}

Model init_model(ModelKind kind, std::size_t n_items, const Hyperparams& hyper)
{
    switch (kind) {
    case ModelKind::L1:
        return BiasParams{std::vector<double>(n_items, 0.0)};
    case ModelKind::Fvbm:
        return PairParams{std::vector<double>(n_items, 0.0), Matrix(n_items, n_items)};
    case ModelKind::Lbl: {
        LblParams p{std::vector<double>(n_items, 0.0), Matrix(n_items, hyper.embedding_dim), hyper.lbl_bias};
        Rng rng(derive_seed(hyper.seed, "init"));
        fill_uniform(p.embed.data, glorot_bound(hyper.init_scale, n_items, hyper.embedding_dim), rng);
        return p;
    }
    case ModelKind::Dem:
        return init_params(n_items, hyper);
    }
    throw std::invalid_argument("init_model: unknown model kind");
}

std::vector<ItemId> sample_negatives(const ItemSet& record, std::size_t count, std::size_t n_items, Rng& rng)
{
    std::vector<ItemId> out;
    if (count == 0)
        return out;
    if (record.size() >= n_items)
        throw std::invalid_argument("sample_negatives: record covers every item, no negatives exist");
    out.reserve(count);
    if (2 * record.size() <= n_items) {
        while (out.size() < count) {
            const auto t = static_cast<ItemId>(rng.uniform_index(n_items));
            if (!record.contains(t))
                out.push_back(t);
        }
    } else {
        std::vector<ItemId> complement;
        complement.reserve(n_items - record.size());
        for (std::size_t t = 0; t < n_items; ++t)
            if (!record.contains(static_cast<ItemId>(t)))
                complement.push_back(static_cast<ItemId>(t));
        for (std::size_t k = 0; k < count; ++k)
            out.push_back(complement[rng.uniform_index(complement.size())]);
    }
    return out;
}

double per_example_loss(const Model& model, const ItemSet& record, std::span<const ItemId> negatives)
{
    check_negatives(record, negatives, n_items(model));
    return std::visit(
        [&](const auto& p) {
            double loss = 0.0;
            std::vector<ItemId> ctx;
            for (std::size_t k = 0; k < record.size(); ++k) {
                leave_one_out(record, k, ctx);
                loss += term_loss(score_unchecked(p, record[k], ctx), true);
            }
            for (ItemId t : negatives)
                loss += term_loss(score_unchecked(p, t, record.view()), false);
            return loss;
        },
        model);
}

double per_example_loss(const DemParams& params, const ItemSet& record, std::span<const ItemId> negatives)
{
    check_negatives(record, negatives, params.n_items());
    double loss = 0.0;
    std::vector<ItemId> ctx;
    for (std::size_t k = 0; k < record.size(); ++k) {
        leave_one_out(record, k, ctx);
        loss += term_loss(score_unchecked(params, record[k], ctx), true);
    }
    if (!negatives.empty()) {
        const HiddenState hidden = dem_forward(params, record.view());
        for (ItemId t : negatives)
            loss += term_loss(dem_score(params, t, record.view(), hidden), false);
    }
    return loss;
}

BackpropMessages backprop_messages(const DemParams& p, ItemId t, const HiddenState& hidden, double delta,
                                   bool drop_propagated_term)
{
    const std::size_t k = p.layers.size();
    BackpropMessages msgs;
    msgs.lambda.resize(k);
    for (std::size_t l = k; l-- > 0;) {
        auto r = p.readouts[l].row(t);
        auto& lam = msgs.lambda[l];
        lam.resize(r.size());
        for (std::size_t o = 0; o < r.size(); ++o)
            lam[o] = delta * r[o];
        if (l + 1 < k && !drop_propagated_term) {
            // lambda_l += W^{l+1}^T (lambda_{l+1} o h_{l+1} o (1 - h_{l+1}))
            const auto& above = msgs.lambda[l + 1];
            const auto& h = hidden.activations[l + 1];
            const Matrix& w = p.layers[l + 1].weight;
            for (std::size_t j = 0; j < lam.size(); ++j) {
                auto wj = w.row(j);
                double acc = 0.0;
                for (std::size_t o = 0; o < wj.size(); ++o)
                    acc += wj[o] * above[o] * h[o] * (1.0 - h[o]);
                lam[j] += acc;
            }
        }
    }
    return msgs;
}

DemParams loss_gradient(const DemParams& params, const ItemSet& record, std::span<const ItemId> negatives,
                        bool drop_propagated_term)
{
    check_negatives(record, negatives, params.n_items());
    DemParams grad = DemParams::zeros(params.n_items(), params.layer_sizes());
    std::vector<ItemId> ctx;
    for (std::size_t k = 0; k < record.size(); ++k) {
        leave_one_out(record, k, ctx);
        accumulate_term_gradient(params, grad, record[k], ctx, true, drop_propagated_term);
    }
    for (ItemId t : negatives)
        accumulate_term_gradient(params, grad, t, record.view(), false, drop_propagated_term);
    return grad;
}

double sgd_update(DemParams& params, const ItemSet& record, std::span<const ItemId> negatives, const StepOptions& opt)
{
    check_negatives(record, negatives, params.n_items());
    double loss = 0.0;
    std::vector<ItemId> ctx;
    ctx.reserve(record.size());
    for (std::size_t k = 0; k < record.size(); ++k) {
        leave_one_out(record, k, ctx);
        loss += dem_term(params, record[k], ctx, true, 1.0, opt);
    }
    for (ItemId t : negatives)
        loss += dem_term(params, t, record.view(), false, opt.negative_weight, opt);
    return loss;
}

double sgd_update(PairParams& params, const ItemSet& record, std::span<const ItemId> negatives, const StepOptions& opt)
{
    check_negatives(record, negatives, params.n_items());
    const double eta = opt.learning_rate;
    const double decay = 1.0 - eta * opt.weight_decay;
    auto term = [&](ItemId t, std::span<const ItemId> ctx, bool positive, double weight) {
        const double s = score_unchecked(params, t, ctx);
        const double delta = weight * ((positive ? 1.0 : 0.0) - sigmoid(s));
        params.bias[t] += eta * delta;
        for (ItemId i : ctx) {
            params.pair(i, t) = params.pair(i, t) * decay + eta * delta;
            if (opt.tied_pairs)
                params.pair(t, i) = params.pair(i, t);
        }
        return term_loss(s, positive);
    };
    double loss = 0.0;
    std::vector<ItemId> ctx;
    for (std::size_t k = 0; k < record.size(); ++k) {
        leave_one_out(record, k, ctx);
        loss += term(record[k], ctx, true, 1.0);
    }
    for (ItemId t : negatives)
        loss += term(t, record.view(), false, opt.negative_weight);
    return loss;
}

double sgd_update(BiasParams& params, const ItemSet& record, std::span<const ItemId> negatives, const StepOptions& opt)
{
    check_negatives(record, negatives, params.n_items());
    double loss = 0.0;
    for (ItemId t : record) {
        const double s = params.bias[t];
        params.bias[t] += opt.learning_rate * (1.0 - sigmoid(s));
        loss += term_loss(s, true);
    }
    for (ItemId t : negatives) {
        const double s = params.bias[t];
        params.bias[t] += opt.learning_rate * opt.negative_weight * (0.0 - sigmoid(s));
        loss += term_loss(s, false);
    }
    return loss;
}

double sgd_update(LblParams& params, const ItemSet& record, std::span<const ItemId> negatives, const StepOptions& opt)
{
    check_negatives(record, negatives, params.n_items());
    const double eta = opt.learning_rate;
    const double decay = 1.0 - eta * opt.weight_decay;
    const std::size_t d = params.embed.cols;
    std::vector<double> u(d), phi_t(d);
    auto term = [&](ItemId t, std::span<const ItemId> ctx, bool positive, double weight) {
        std::fill(u.begin(), u.end(), 0.0);
        for (ItemId i : ctx) {
            auto phi = params.embed.row(i);
            for (std::size_t k = 0; k < d; ++k)
                u[k] += phi[k];
        }
        const double s = (params.use_bias ? params.bias[t] : 0.0) + dot(params.embed.row(t), u);
        const double delta = weight * ((positive ? 1.0 : 0.0) - sigmoid(s));
        auto target = params.embed.row(t);
        std::copy(target.begin(), target.end(), phi_t.begin());
        for (std::size_t k = 0; k < d; ++k)
            target[k] = target[k] * decay + eta * delta * u[k];
        for (ItemId i : ctx) {
            auto phi = params.embed.row(i);
            for (std::size_t k = 0; k < d; ++k)
                phi[k] = phi[k] * decay + eta * delta * phi_t[k];
        }
        if (params.use_bias)
            params.bias[t] += eta * delta;
        return term_loss(s, positive);
    };
    double loss = 0.0;
    std::vector<ItemId> ctx;
    for (std::size_t k = 0; k < record.size(); ++k) {
        leave_one_out(record, k, ctx);
        loss += term(record[k], ctx, true, 1.0);
    }
    for (ItemId t : negatives)
        loss += term(t, record.view(), false, opt.negative_weight);
    return loss;
}

double sgd_update(Model& model, const ItemSet& record, std::span<const ItemId> negatives, const StepOptions& opt)
{
    return std::visit([&](auto& p) { return sgd_update(p, record, negatives, opt); }, model);
}

StepOptions step_options(const Hyperparams& hyper, double learning_rate, ModelKind kind)
{
    StepOptions opt;
    opt.learning_rate = learning_rate;
    opt.weight_decay = hyper.weight_decay;
    opt.tied_pairs = kind != ModelKind::Fvbm || hyper.fvbm_tied;
    return opt;
}

double sgd_update(Model& model, const ItemSet& record, const Hyperparams& hyper, double learning_rate, Rng& rng)
{
    const std::size_t n = n_items(model);
    const std::size_t count = record.size() < n ? hyper.negatives : 0;
    const auto negatives = sample_negatives(record, count, n, rng);
    StepOptions opt = step_options(hyper, learning_rate, kind_of(model));
    if (hyper.reweight_negatives && count > 0)
        opt.negative_weight = static_cast<double>(n - record.size()) / static_cast<double>(count);
    return sgd_update(model, record, negatives, opt);
}

TrainResult train_from(Model initial, const Corpus& corpus, const TrainConfig& config)
{
    const Hyperparams& hyper = config.hyper;
    validate(hyper);
    if (n_items(initial) != corpus.n_items)
        throw std::invalid_argument("train: model and corpus disagree on the item count");
    TrainResult result{std::move(initial), {}};
    if (hyper.epochs > 0 && corpus.records.empty())
        throw std::invalid_argument("train: corpus has no records");

    Rng negatives_rng(derive_seed(hyper.seed, "negatives"));
    std::vector<std::size_t> order(corpus.records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    double lr = hyper.learning_rate;
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        Rng shuffle_rng(derive_seed(hyper.seed, "shuffle", epoch));
        for (std::size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_index(i + 1)]);
        double total = 0.0;
        for (std::size_t idx : order)
            total += sgd_update(result.model, corpus.records[idx], hyper, lr, negatives_rng);
        const double mean = total / static_cast<double>(order.size());
        result.trace.epoch_losses.push_back(mean);
        result.trace.wall_times.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        lr *= hyper.lr_decay;
        if (config.on_epoch)
            config.on_epoch(epoch, mean);
    }
    return result;
}

TrainResult train(const Corpus& corpus, const TrainConfig& config)
{
    validate(config.hyper);
    return train_from(init_model(config.kind, corpus.n_items, config.hyper), corpus, config);
}

double gradient_check(const DemParams& params, const ItemSet& record, std::span<const ItemId> negatives,
                      double epsilon, bool drop_propagated_term)
{
    if (!(epsilon >= 1e-7 && epsilon <= 1e-3))
        throw std::invalid_argument("gradient_check: epsilon must lie in [1e-7, 1e-3]");
    const DemParams analytic = loss_gradient(params, record, negatives, drop_propagated_term);
    const std::vector<double> numeric = kernels::numeric_gradient_parallel(params, record, negatives, epsilon);
    double worst = 0.0;
    std::size_t flat = 0;
    for (auto tensor : analytic.tensors()) {
        for (double a : tensor) {
            const double n = numeric[flat++];
            worst = std::max(worst, std::abs(a - n) / std::max(1e-8, std::abs(a) + std::abs(n)));
        }
    }
    return worst;
}

double gradient_check(const DemParams& params, const ItemSet& record, std::size_t negatives, double epsilon,
                      std::uint64_t seed, bool drop_propagated_term)
{
    Rng rng(derive_seed(seed, "negatives"));
    const auto sampled = sample_negatives(record, negatives, params.n_items(), rng);
    return gradient_check(params, record, sampled, epsilon, drop_propagated_term);
}

GradientInstance make_gradient_instance(std::size_t n_items, std::span<const std::size_t> layer_sizes,
                                        std::size_t negatives, std::uint64_t seed)
{
    if (n_items < 3)
        throw std::invalid_argument("gradient instance needs at least three items");
    Hyperparams hyper;
    hyper.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
    hyper.seed = seed;
    GradientInstance inst{init_params(n_items, hyper), {}, {}};
    Rng rng(derive_seed(seed, "instance"));
    fill_uniform(inst.params.bias, 0.5, rng);
    fill_uniform(inst.params.pair_readout.data, 0.5, rng);
    for (std::size_t i = 0; i < n_items; ++i)
        inst.params.pair_readout(i, i) = 0.0;
    for (auto& layer : inst.params.layers)
        fill_uniform(layer.bias, 0.5, rng);

    const std::size_t size = 2 + rng.uniform_index(std::max<std::size_t>(1, n_items / 3));
    std::vector<ItemId> ids;
    while (ids.size() < size) {
        const auto t = static_cast<ItemId>(rng.uniform_index(n_items));
        if (std::find(ids.begin(), ids.end(), t) == ids.end())
            ids.push_back(t);
    }
    inst.record = make_itemset(ids, n_items);
    inst.negatives = sample_negatives(inst.record, negatives, n_items, rng);
    return inst;
}

}  // namespace cooc
