#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cooc/baselines.hpp"
#include "cooc/corpus.hpp"
#include "cooc/scorers.hpp"
#include "cooc/training.hpp"

namespace cooc {

/// Scores every item for a context. Implementations are immutable and
/// safe to call concurrently.
class CandidateScorer {
public:
    virtual ~CandidateScorer() = default;
    virtual std::size_t n_items() const = 0;
    /// out.size() == n_items(); values at context positions are ignored.
    virtual void score_items(const ItemSet& context, std::span<double> out) const = 0;
};

class ModelScorer final : public CandidateScorer {
public:
    explicit ModelScorer(Model model) : model_(std::move(model)) {}
    std::size_t n_items() const override { return cooc::n_items(model_); }
    void score_items(const ItemSet& context, std::span<double> out) const override
    {
        score_every_item(model_, context.view(), out);
    }
    const Model& model() const { return model_; }

private:
    Model model_;
};

enum class BaselineKind { Popularity, Cvg, NormCvg, Lrw };
BaselineKind parse_baseline_kind(const std::string& name);
std::string baseline_name(BaselineKind kind);

struct BaselineConfig {
    BaselineKind kind = BaselineKind::Cvg;
    CovisitNorm norm = CovisitNorm::Cosine;
    std::size_t lrw_steps = 2;
    WalkAggregate lrw_aggregate = WalkAggregate::Cumulative;
};

class BaselineScorer final : public CandidateScorer {
public:
    BaselineScorer(CovisitGraph graph, BaselineConfig config) : graph_(std::move(graph)), config_(config) {}
    std::size_t n_items() const override { return graph_.n_items; }
    void score_items(const ItemSet& context, std::span<double> out) const override;
    const CovisitGraph& graph() const { return graph_; }

private:
    CovisitGraph graph_;
    BaselineConfig config_;
};

/// A method under evaluation: a trainable model or a heuristic baseline.
struct MethodConfig {
    std::variant<TrainConfig, BaselineConfig> method;
    std::string label;
};

std::unique_ptr<CandidateScorer> fit(const MethodConfig& method, const Corpus& train_corpus);

struct RankedList {
    std::vector<ItemId> items;  // by descending score, ties by ascending id
    std::vector<double> scores;
};

/// Top-K non-context items; shorter when fewer candidates exist.
RankedList rank_from_scores(std::span<const double> scores, const ItemSet& context, std::size_t k);
RankedList rank_candidates(const CandidateScorer& scorer, const ItemSet& context, std::size_t k);

/// Position (1-based) target would take in rank_from_scores.
std::size_t target_rank(std::span<const double> scores, const ItemSet& context, ItemId target);

double topk_accuracy(std::span<const MaskedRecord> masked, const CandidateScorer& scorer, std::size_t k);
double topk_accuracy_from_ranks(std::span<const std::size_t> ranks, std::size_t k);

/// Masks one item of every record with at least two items.
std::vector<MaskedRecord> mask_records(const Corpus& corpus, std::span<const std::size_t> record_ids,
                                       std::uint64_t seed);

struct EvalReport {
    std::string label;
    std::vector<std::size_t> ks;
    std::vector<double> mean;  // per K, across folds
    std::vector<double> std;   // sample standard deviation across folds
    std::vector<std::vector<double>> fold_accuracy;  // [fold][k index]
    std::vector<std::size_t> ranks;  // every test record, fold by fold
    std::size_t n_test = 0;
    double wall_time = 0.0;
};

/// k-fold protocol: train on the other folds, mask one item of every eligible
/// record of the held-out fold, rank, and aggregate Top@K over folds.
EvalReport cross_validate(const Corpus& corpus, const MethodConfig& method, std::span<const std::size_t> ks,
                          std::size_t k_folds, std::uint64_t seed);

/// Same protocol with fixed scorers that need no training (e.g. loaded
/// checkpoints). All scorers see identical masked records.
EvalReport evaluate_fixed(const Corpus& corpus, const CandidateScorer& scorer, const std::string& label,
                          std::span<const std::size_t> ks, std::size_t k_folds, std::uint64_t seed);

Corpus subset(const Corpus& corpus, std::span<const std::size_t> record_ids);

/// Exact two-sided McNemar test on discordant pairs (b, c).
double mcnemar_exact(std::uint64_t b, std::uint64_t c);
/// Paired hit indicators of two methods on the same records.
double mcnemar_significance(const std::vector<bool>& hits_a, const std::vector<bool>& hits_b);

std::vector<bool> hits_at(std::span<const std::size_t> ranks, std::size_t k);

/// Tab-separated rows: model, K, mean, std, n_test, seconds.
void write_report_header(std::ostream& out);
void write_report_rows(std::ostream& out, const EvalReport& report);
std::string report_summary_json(std::span<const EvalReport> reports);

}  // namespace cooc
