#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cooc/corpus.hpp"
#include "cooc/rng.hpp"
#include "cooc/scorers.hpp"

namespace cooc {

struct Hyperparams {
    double learning_rate = 0.05;
    double lr_decay = 0.95;        // multiplier applied after every epoch
    std::size_t negatives = 5;     // T sampled absent items per record
    std::size_t epochs = 20;
    std::vector<std::size_t> layer_sizes;  // DEM hidden widths, bottom to top
    double init_scale = 1.0;
    double weight_decay = 1e-6;
    std::uint64_t seed = 1;
    std::size_t embedding_dim = 32;  // LBL only
    bool lbl_bias = true;
    bool fvbm_tied = true;           // false: asymmetric pair weights
    bool reweight_negatives = false; // scale negative terms by (N - |v|) / T
};

/// Throws std::invalid_argument when a field is outside its domain.
void validate(const Hyperparams& hyper);

struct TrainConfig {
    ModelKind kind = ModelKind::Dem;
    Hyperparams hyper;
    // Called after every epoch with (epoch index, mean loss).
    std::function<void(std::size_t, double)> on_epoch;
};

struct TrainingTrace {
    std::vector<double> epoch_losses;
    std::vector<double> wall_times;  // seconds per epoch
};

struct TrainResult {
    Model model;
    TrainingTrace trace;
};

/// Per-layer messages lambda_l = delta * dscore/dh_l.
struct BackpropMessages {
    std::vector<std::vector<double>> lambda;
};

/// Per-term settings of one SGD step.
struct StepOptions {
    double learning_rate = 0.05;
    double weight_decay = 0.0;
    double negative_weight = 1.0;
    bool tied_pairs = true;              // FVBM only
    bool drop_propagated_term = false;   // debug: breaks the lambda recursion
};

/// DEM initialisation: bias and pair readout zero, W and R uniform in
/// [-a, a] with a = init_scale * sqrt(6 / (fan_in + fan_out)), layer biases zero.
DemParams init_params(std::size_t n_items, const Hyperparams& hyper);
Model init_model(ModelKind kind, std::size_t n_items, const Hyperparams& hyper);

/// T items drawn uniformly (with replacement) from the complement of record.
/// Throws std::invalid_argument when T > 0 and the complement is empty.
std::vector<ItemId> sample_negatives(const ItemSet& record, std::size_t count, std::size_t n_items, Rng& rng);

/// sum_{t in record} -ln sigmoid(s(t, record - {t})) + sum_{t in negatives} -ln sigmoid(-s(t, record))
double per_example_loss(const Model& model, const ItemSet& record, std::span<const ItemId> negatives);
double per_example_loss(const DemParams& params, const ItemSet& record, std::span<const ItemId> negatives);

/// dscore/dh_l for target t, scaled by delta. Requires a forward pass of the
/// term's context.
BackpropMessages backprop_messages(const DemParams& params, ItemId t, const HiddenState& hidden, double delta,
                                   bool drop_propagated_term = false);

/// Gradient of per_example_loss with respect to every DEM parameter, laid
/// out like params.
DemParams loss_gradient(const DemParams& params, const ItemSet& record, std::span<const ItemId> negatives,
                        bool drop_propagated_term = false);

/// One pass of the per-record update: every positive against its
/// leave-one-out context, then every negative against the full record, each
/// applied immediately. Returns the summed loss of the terms, each evaluated
/// before its own update.
double sgd_update(DemParams& params, const ItemSet& record, std::span<const ItemId> negatives, const StepOptions& opt);
double sgd_update(PairParams& params, const ItemSet& record, std::span<const ItemId> negatives, const StepOptions& opt);
double sgd_update(BiasParams& params, const ItemSet& record, std::span<const ItemId> negatives, const StepOptions& opt);
double sgd_update(LblParams& params, const ItemSet& record, std::span<const ItemId> negatives, const StepOptions& opt);
double sgd_update(Model& model, const ItemSet& record, std::span<const ItemId> negatives, const StepOptions& opt);

/// Samples negatives from rng, then applies sgd_update with hyper's settings at
/// the given learning rate.
double sgd_update(Model& model, const ItemSet& record, const Hyperparams& hyper, double learning_rate, Rng& rng);

StepOptions step_options(const Hyperparams& hyper, double learning_rate, ModelKind kind);

/// Sequential SGD over shuffled records with a per-epoch learning-rate decay.
TrainResult train(const Corpus& corpus, const TrainConfig& config);
/// Same, starting from the given parameters.
TrainResult train_from(Model initial, const Corpus& corpus, const TrainConfig& config);

/// Central-difference check of loss_gradient on a frozen loss (fixed
/// negatives). Returns max_i |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
double gradient_check(const DemParams& params, const ItemSet& record, std::span<const ItemId> negatives,
                      double epsilon, bool drop_propagated_term = false);
/// Samples T negatives with seed and checks as above.
double gradient_check(const DemParams& params, const ItemSet& record, std::size_t negatives, double epsilon,
                      std::uint64_t seed, bool drop_propagated_term = false);

/// Random DEM with nonzero biases and pair readout, a random record and
/// fixed negatives; all drawn from seed.
struct GradientInstance {
    DemParams params;
    ItemSet record;
    std::vector<ItemId> negatives;
};
GradientInstance make_gradient_instance(std::size_t n_items, std::span<const std::size_t> layer_sizes,
                                        std::size_t negatives, std::uint64_t seed);

}  // namespace cooc
