#include "cooc/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "cooc/kernels.hpp"

namespace cooc {

BaselineKind parse_baseline_kind(const std::string& name)
{
    if (name == "popularity")
        return BaselineKind::Popularity;
    if (name == "cvg")
        return BaselineKind::Cvg;
    if (name == "normcvg")
        return BaselineKind::NormCvg;
    if (name == "lrw")
        return BaselineKind::Lrw;
    throw std::invalid_argument("unknown baseline '" + name + "' (expected cvg, normcvg, lrw or popularity)");
}

std::string baseline_name(BaselineKind kind)
{
    switch (kind) {
    case BaselineKind::Popularity: return "popularity";
    case BaselineKind::Cvg: return "cvg";
    case BaselineKind::NormCvg: return "normcvg";
    case BaselineKind::Lrw: return "lrw";
    }
    return "unknown";
}

void BaselineScorer::score_items(const ItemSet& context, std::span<double> out) const
{
    switch (config_.kind) {
    case BaselineKind::Popularity:
        for (std::size_t t = 0; t < out.size(); ++t)
            out[t] = static_cast<double>(graph_.item_freq[t]);
        break;
    case BaselineKind::Cvg:
        cvg_score_items(graph_, context.view(), out);
        break;
    case BaselineKind::NormCvg:
        normcvg_score_items(graph_, context.view(), out, config_.norm);
        break;
    case BaselineKind::Lrw:
        lrw_score_items(graph_, context.view(), out, config_.lrw_steps, config_.lrw_aggregate);
        break;
    }
}

std::unique_ptr<CandidateScorer> fit(const MethodConfig& method, const Corpus& train_corpus)
{
    if (const auto* tc = std::get_if<TrainConfig>(&method.method))
        return std::make_unique<ModelScorer>(train(train_corpus, *tc).model);
    const auto& bc = std::get<BaselineConfig>(method.method);
    return std::make_unique<BaselineScorer>(build_covisit(train_corpus), bc);
}

namespace {

bool ranks_before(double score_a, ItemId a, double score_b, ItemId b)
{
    return score_a > score_b || (score_a == score_b && a < b);
}

}  // namespace

RankedList rank_from_scores(std::span<const double> scores, const ItemSet& context, std::size_t k)
{
    if (k == 0)
        throw std::invalid_argument("rank_candidates: K must be at least 1");
    std::vector<ItemId> candidates;
    candidates.reserve(scores.size());
    for (std::size_t t = 0; t < scores.size(); ++t)
        if (!context.contains(static_cast<ItemId>(t)))
            candidates.push_back(static_cast<ItemId>(t));
    const std::size_t keep = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      [&](ItemId a, ItemId b) { return ranks_before(scores[a], a, scores[b], b); });
    RankedList list;
    list.items.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep));
    for (ItemId t : list.items)
        list.scores.push_back(scores[t]);
    return list;
}

RankedList rank_candidates(const CandidateScorer& scorer, const ItemSet& context, std::size_t k)
{
    std::vector<double> scores(scorer.n_items());
    scorer.score_items(context, scores);
    return rank_from_scores(scores, context, k);
}

std::size_t target_rank(std::span<const double> scores, const ItemSet& context, ItemId target)
{
    const double st = scores[target];
    std::size_t ahead = 0;
    auto ctx = context.begin();
    for (std::size_t t = 0; t < scores.size(); ++t) {
        while (ctx != context.end() && *ctx < t)
            ++ctx;
        if (ctx != context.end() && *ctx == t)
            continue;
        if (t != target && ranks_before(scores[t], static_cast<ItemId>(t), st, target))
            ++ahead;
    }
    return ahead + 1;
}

double topk_accuracy_from_ranks(std::span<const std::size_t> ranks, std::size_t k)
{
    if (ranks.empty())
        throw std::invalid_argument("topk_accuracy: empty test set");
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double topk_accuracy(std::span<const MaskedRecord> masked, const CandidateScorer& scorer, std::size_t k)
{
    if (masked.empty())
        throw std::invalid_argument("topk_accuracy: empty test set");
    const auto ranks = kernels::target_ranks_parallel(scorer, masked);
    return topk_accuracy_from_ranks(ranks, k);
}

std::vector<MaskedRecord> mask_records(const Corpus& corpus, std::span<const std::size_t> record_ids,
                                       std::uint64_t seed)
{
    std::vector<MaskedRecord> out;
    for (std::size_t rid : record_ids) {
        const auto& rec = corpus.records.at(rid);
        if (rec.size() >= 2)
            out.push_back(mask_one_item(rec, derive_seed(seed, "mask", rid)));
    }
    return out;
}

Corpus subset(const Corpus& corpus, std::span<const std::size_t> record_ids)
{
    Corpus out;
    out.n_items = corpus.n_items;
    out.vocab = corpus.vocab;
    out.records.reserve(record_ids.size());
    for (std::size_t rid : record_ids)
        out.records.push_back(corpus.records.at(rid));
    recount_occurrences(out);
    return out;
}

namespace {

template <typename FoldScorer>
EvalReport run_folds(const Corpus& corpus, const std::string& label, std::span<const std::size_t> ks,
                     std::size_t k_folds, std::uint64_t seed, FoldScorer&& scorer_for_fold)
{
    if (ks.empty())
        throw std::invalid_argument("evaluate: at least one K required");
    const auto start = std::chrono::steady_clock::now();
    const FoldSplit split = split_folds(corpus, k_folds, seed);
    EvalReport report;
    report.label = label;
    report.ks.assign(ks.begin(), ks.end());
    for (std::size_t f = 0; f < k_folds; ++f) {
        const auto test_ids = split.records_in(f);
        const auto masked = mask_records(corpus, test_ids, seed);
        if (masked.empty())
            throw std::invalid_argument("fold " + std::to_string(f) + " has no record with two or more items");
        const CandidateScorer& scorer = scorer_for_fold(split, f);
        const auto ranks = kernels::target_ranks_parallel(scorer, masked);
        std::vector<double> acc;
        for (std::size_t k : ks)
            acc.push_back(topk_accuracy_from_ranks(ranks, k));
        report.fold_accuracy.push_back(std::move(acc));
        report.ranks.insert(report.ranks.end(), ranks.begin(), ranks.end());
        report.n_test += ranks.size();
    }
    const double folds = static_cast<double>(k_folds);
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        double sum = 0.0;
        for (const auto& fa : report.fold_accuracy)
            sum += fa[ki];
        const double mean = sum / folds;
        double ss = 0.0;
        for (const auto& fa : report.fold_accuracy)
            ss += (fa[ki] - mean) * (fa[ki] - mean);
        report.mean.push_back(mean);
        report.std.push_back(std::sqrt(ss / (folds - 1.0)));
    }
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace

EvalReport cross_validate(const Corpus& corpus, const MethodConfig& method, std::span<const std::size_t> ks,
                          std::size_t k_folds, std::uint64_t seed)
{
    std::unique_ptr<CandidateScorer> current;
    return run_folds(corpus, method.label, ks, k_folds, seed,
                     [&](const FoldSplit& split, std::size_t f) -> const CandidateScorer& {
                         const auto train_ids = split.records_not_in(f);
                         current = fit(method, subset(corpus, train_ids));
                         return *current;
                     });
}

EvalReport evaluate_fixed(const Corpus& corpus, const CandidateScorer& scorer, const std::string& label,
                          std::span<const std::size_t> ks, std::size_t k_folds, std::uint64_t seed)
{
    if (scorer.n_items() != corpus.n_items)
        throw std::invalid_argument("evaluate: scorer and corpus disagree on the item count");
    return run_folds(corpus, label, ks, k_folds, seed,
                     [&](const FoldSplit&, std::size_t) -> const CandidateScorer& { return scorer; });
}

double mcnemar_exact(std::uint64_t b, std::uint64_t c)
{
    const std::uint64_t n = b + c;
    if (n == 0)
        return 1.0;
    const std::uint64_t k = std::min(b, c);
    const double nd = static_cast<double>(n);
    std::vector<double> logs;
    for (std::uint64_t i = 0; i <= k; ++i) {
        const double id = static_cast<double>(i);
        logs.push_back(std::lgamma(nd + 1.0) - std::lgamma(id + 1.0) - std::lgamma(nd - id + 1.0) -
                       nd * std::log(2.0));
    }
    const double top = *std::max_element(logs.begin(), logs.end());
    double sum = 0.0;
    for (double l : logs)
        sum += std::exp(l - top);
    return std::min(1.0, 2.0 * std::exp(top) * sum);
}

double mcnemar_significance(const std::vector<bool>& hits_a, const std::vector<bool>& hits_b)
{
    if (hits_a.size() != hits_b.size())
        throw std::invalid_argument("mcnemar: hit vectors differ in length");
    std::uint64_t b = 0, c = 0;
    for (std::size_t i = 0; i < hits_a.size(); ++i) {
        if (hits_a[i] && !hits_b[i])
            ++b;
        else if (!hits_a[i] && hits_b[i])
            ++c;
    }
    return mcnemar_exact(b, c);
}

std::vector<bool> hits_at(std::span<const std::size_t> ranks, std::size_t k)
{
    std::vector<bool> hits(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i)
        hits[i] = ranks[i] <= k;
    return hits;
}

void write_report_header(std::ostream& out)
{
    out << "model\tK\tmean\tstd\tn_test\tseconds\n";
}

void write_report_rows(std::ostream& out, const EvalReport& report)
{
    for (std::size_t ki = 0; ki < report.ks.size(); ++ki)
        out << report.label << '\t' << report.ks[ki] << '\t' << std::fixed << std::setprecision(6) << report.mean[ki]
            << '\t' << report.std[ki] << '\t' << report.n_test << '\t' << std::setprecision(3) << report.wall_time
            << std::defaultfloat << '\n';
}

std::string report_summary_json(std::span<const EvalReport> reports)
{
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json entry;
        entry["model"] = r.label;
        entry["n_test"] = r.n_test;
        entry["seconds"] = r.wall_time;
        nlohmann::json per_k = nlohmann::json::array();
        for (std::size_t ki = 0; ki < r.ks.size(); ++ki) {
            nlohmann::json folds = nlohmann::json::array();
            for (const auto& fa : r.fold_accuracy)
                folds.push_back(fa[ki]);
            per_k.push_back({{"k", r.ks[ki]}, {"mean", r.mean[ki]}, {"std", r.std[ki]}, {"folds", folds}});
        }
        entry["top_k"] = per_k;
        doc.push_back(entry);
    }
    return doc.dump(2);
}

}  // namespace cooc
