#include "cooc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace cooc {

std::uint64_t CovisitGraph::count(ItemId i, ItemId j) const
{
    auto nb = neighbours(i);
    auto it = std::lower_bound(nb.begin(), nb.end(), j);
    if (it == nb.end() || *it != j)
        return 0;
    return weights(i)[static_cast<std::size_t>(it - nb.begin())];
}

CovisitNorm parse_covisit_norm(const std::string& s)
{
    if (s == "cosine")
        return CovisitNorm::Cosine;
    if (s == "target")
        return CovisitNorm::Target;
    if (s == "source")
        return CovisitNorm::Source;
    throw std::invalid_argument("norm must be cosine, target or source, got '" + s + "'");
}

CovisitGraph build_covisit(const Corpus& corpus)
{
    const std::size_t n = corpus.n_items;
    CovisitGraph g;
    g.n_items = n;
    g.item_freq.assign(n, 0);
    g.degree.assign(n, 0);
    g.row_start.assign(n + 1, 0);

    std::vector<std::vector<std::pair<ItemId, std::uint32_t>>> rows(n);
    constexpr std::size_t kDenseLimit = 4096;
    if (n <= kDenseLimit) {
        std::vector<std::uint32_t> dense(n * n, 0);
        for (const auto& rec : corpus.records)
            for (std::size_t a = 0; a < rec.size(); ++a)
                for (std::size_t b = a + 1; b < rec.size(); ++b)
                    ++dense[rec[a] * n + rec[b]];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (const auto c = dense[i * n + j]) {
                    rows[i].emplace_back(static_cast<ItemId>(j), c);
                    rows[j].emplace_back(static_cast<ItemId>(i), c);
                }
        for (auto& row : rows)
            std::sort(row.begin(), row.end());
    } else {
        std::vector<std::unordered_map<ItemId, std::uint32_t>> maps(n);
        for (const auto& rec : corpus.records)
            for (std::size_t a = 0; a < rec.size(); ++a)
                for (std::size_t b = a + 1; b < rec.size(); ++b) {
                    ++maps[rec[a]][rec[b]];
                    ++maps[rec[b]][rec[a]];
                }
        for (std::size_t i = 0; i < n; ++i) {
            rows[i].assign(maps[i].begin(), maps[i].end());
            std::sort(rows[i].begin(), rows[i].end());
        }
    }

    for (const auto& rec : corpus.records)
        for (ItemId id : rec)
            ++g.item_freq[id];
    for (std::size_t i = 0; i < n; ++i) {
        g.row_start[i + 1] = g.row_start[i] + rows[i].size();
        for (const auto& [j, c] : rows[i]) {
            g.neighbour.push_back(j);
            g.weight.push_back(c);
            g.degree[i] += c;
        }
    }
    return g;
}

namespace {

double norm_factor(const CovisitGraph& g, ItemId source, ItemId target, CovisitNorm norm)
{
    const double fs = static_cast<double>(g.item_freq[source]);
    const double ft = static_cast<double>(g.item_freq[target]);
    switch (norm) {
    case CovisitNorm::Cosine: return std::sqrt(fs * ft);
    case CovisitNorm::Target: return ft;
    case CovisitNorm::Source: return fs;
    }
    return 1.0;
}

// One step of x <- x P over the sparse rows.
void walk_step(const CovisitGraph& g, const std::vector<double>& x, std::vector<double>& y)
{
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < g.n_items; ++i) {
        if (x[i] == 0.0 || g.degree[i] == 0)
            continue;
        const double deg = static_cast<double>(g.degree[i]);
        auto nb = g.neighbours(static_cast<ItemId>(i));
        auto w = g.weights(static_cast<ItemId>(i));
        for (std::size_t k = 0; k < nb.size(); ++k)
            y[nb[k]] += x[i] * (static_cast<double>(w[k]) / deg);
    }
}

}  // namespace

void cvg_score_items(const CovisitGraph& g, std::span<const ItemId> context, std::span<double> out)
{
    std::fill(out.begin(), out.end(), 0.0);
    for (ItemId i : context) {
        auto nb = g.neighbours(i);
        auto w = g.weights(i);
        for (std::size_t k = 0; k < nb.size(); ++k)
            out[nb[k]] += static_cast<double>(w[k]);
    }
}

void normcvg_score_items(const CovisitGraph& g, std::span<const ItemId> context, std::span<double> out,
                         CovisitNorm norm)
{
    std::fill(out.begin(), out.end(), 0.0);
    for (ItemId i : context) {
        auto nb = g.neighbours(i);
        auto w = g.weights(i);
        for (std::size_t k = 0; k < nb.size(); ++k)
            out[nb[k]] += static_cast<double>(w[k]) / norm_factor(g, i, nb[k], norm);
    }
}

void lrw_score_items(const CovisitGraph& g, std::span<const ItemId> context, std::span<double> out, std::size_t steps,
                     WalkAggregate aggregate)
{
    std::vector<double> x(g.n_items, 0.0), y(g.n_items, 0.0);
    for (ItemId i : context)
        x[i] = 1.0;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t s = 1; s <= steps; ++s) {
        walk_step(g, x, y);
        std::swap(x, y);
        if (aggregate == WalkAggregate::Cumulative || s == steps)
            for (std::size_t t = 0; t < out.size(); ++t)
                out[t] += x[t];
    }
}

double cvg_score(const CovisitGraph& g, const ItemSet& context, ItemId t)
{
    double s = 0.0;
    for (ItemId i : context)
        s += static_cast<double>(g.count(i, t));
    return s;
}

double normcvg_score(const CovisitGraph& g, const ItemSet& context, ItemId t, CovisitNorm norm)
{
    if (g.item_freq[t] == 0)
        return 0.0;
    double s = 0.0;
    for (ItemId i : context)
        if (const auto c = g.count(i, t))
            s += static_cast<double>(c) / norm_factor(g, i, t, norm);
    return s;
}

double lrw_score(const CovisitGraph& g, const ItemSet& context, ItemId t, std::size_t steps, WalkAggregate aggregate)
{
    std::vector<double> out(g.n_items);
    lrw_score_items(g, context.view(), out, steps, aggregate);
    return out[t];
}

}  // namespace cooc
