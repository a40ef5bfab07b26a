#pragma once

// Dynamic-energy scorers. Every model exposes a score s(t, context) whose
// sigmoid is the conditional probability p(v_t = 1 | v_(-t) = context).
//
// Score convention: s(t, c) = E(c) - E(c + {t}), so a larger score means the
// item is more likely present. Biases are stored in the same convention
// (sigmoid(bias[t]) is the L1 occurrence probability of t).

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cooc/corpus.hpp"
#include "cooc/matrix.hpp"

namespace cooc {

class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Independent-items model.
struct BiasParams {
    std::vector<double> bias;

    std::size_t n_items() const { return bias.size(); }
    friend bool operator==(const BiasParams&, const BiasParams&) = default;
};

/// Pairwise (fully visible Boltzmann machine) model. pair is a dense N x N
/// matrix with zero diagonal; pair(i, t) is the weight item i contributes to
/// the score of t. Symmetric unless trained with untied weights.
struct PairParams {
    std::vector<double> bias;
    Matrix pair;

    std::size_t n_items() const { return bias.size(); }
    bool is_symmetric() const;
    friend bool operator==(const PairParams&, const PairParams&) = default;
};

/// Log-bilinear embedding model: s = bias[t] + phi_t . sum_{i in c} phi_i.
struct LblParams {
    std::vector<double> bias;
    Matrix embed;  // N x d, row t = phi_t
    bool use_bias = true;

    std::size_t n_items() const { return bias.size(); }
    friend bool operator==(const LblParams&, const LblParams&) = default;
};

/// One sigmoid layer. Weights are stored input-major: weight(j, o) is the
/// weight from input unit j to output unit o, so row i of the first layer is
/// the contribution of item i and a sparse context sums |context| rows.
struct DenseLayer {
    Matrix weight;  // fan_in x fan_out
    std::vector<double> bias;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Deep embedding model:
///   s(t, c) = bias[t] + sum_{i in c} pair_readout(i, t) + sum_l readouts[l].row(t) . h_l
///   h_1 = sigmoid(W^1 v_c + B^1),  h_l = sigmoid(W^l h_{l-1} + B^l)
struct DemParams {
    std::vector<double> bias;
    Matrix pair_readout;  // N x N, zero diagonal, not symmetric
    std::vector<DenseLayer> layers;
    std::vector<Matrix> readouts;  // readouts[l] is N x H_l

    std::size_t n_items() const { return bias.size(); }
    std::vector<std::size_t> layer_sizes() const;

    /// Zero-valued parameters of the given shape.
    static DemParams zeros(std::size_t n_items, std::span<const std::size_t> layer_sizes);

    /// Mutable/const views of every parameter tensor in a fixed order: bias,
    /// pair_readout, then (weight, bias) per layer, then each readout.
    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;
    std::size_t parameter_count() const;

    friend bool operator==(const DemParams&, const DemParams&) = default;
};

/// Throws ContractError if the shapes do not chain or the diagonal is nonzero.
void validate(const DemParams& params);

struct HiddenState {
    std::vector<std::vector<double>> activations;  // h_1 .. h_k
};

using Model = std::variant<BiasParams, PairParams, LblParams, DemParams>;

enum class ModelKind { L1, Fvbm, Lbl, Dem };

ModelKind parse_model_kind(const std::string& name);
std::string model_kind_name(ModelKind kind);
ModelKind kind_of(const Model& model);
std::size_t n_items(const Model& model);

// Numerically stable for any finite x.
double sigmoid(double x);
// ln sigmoid(x), stable for large |x|.
double log_sigmoid(double x);

HiddenState dem_forward(const DemParams& params, std::span<const ItemId> context);
inline HiddenState dem_forward(const DemParams& params, const ItemSet& context)
{
    return dem_forward(params, context.view());
}

/// DEM score for target t using an already computed forward pass of context.
double dem_score(const DemParams& params, ItemId t, std::span<const ItemId> context, const HiddenState& hidden);

// Unchecked scores: context must be sorted and must not contain t.
double score_unchecked(const BiasParams& params, ItemId t, std::span<const ItemId> context);
double score_unchecked(const PairParams& params, ItemId t, std::span<const ItemId> context);
double score_unchecked(const LblParams& params, ItemId t, std::span<const ItemId> context);
double score_unchecked(const DemParams& params, ItemId t, std::span<const ItemId> context);

/// Throws ContractError when t is in context or out of range.
double score(const BiasParams& params, ItemId t, const ItemSet& context);
double score(const PairParams& params, ItemId t, const ItemSet& context);
double score(const LblParams& params, ItemId t, const ItemSet& context);
double score(const DemParams& params, ItemId t, const ItemSet& context);
double score(const Model& model, ItemId t, const ItemSet& context);

/// Scores for each candidate; bitwise equal to calling score() per candidate.
/// Candidates overlapping the context raise ContractError.
std::vector<double> score_all(const Model& model, const ItemSet& context, std::span<const ItemId> candidates);

/// Fills out[t] for every item t (out.size() == N). Entries for context items
/// are filled but meaningless. Non-context entries equal score() bitwise.
void score_every_item(const Model& model, std::span<const ItemId> context, std::span<double> out);

double conditional_probability(const Model& model, ItemId t, const ItemSet& context);

/// Global energy of v for the models that have one in closed form:
///   L1: -sum_{i in v} bias[i]
///   L2: -sum_{i in v} bias[i] - sum_{i<j in v} pair(i, j)
/// so that explicit_energy(c) - explicit_energy(c + {t}) == score(t, c).
/// The pair form requires a symmetric matrix.
double explicit_energy(const BiasParams& params, const ItemSet& v);
double explicit_energy(const PairParams& params, const ItemSet& v);

/// sigmoid(E(c) - E(c + {t})), computed from global energies only.
double oracle_conditional(const BiasParams& params, ItemId t, const ItemSet& context);
double oracle_conditional(const PairParams& params, ItemId t, const ItemSet& context);

/// Zero-layer DEM whose pair readout is a copy of the FVBM weights.
DemParams dem_from_fvbm(const PairParams& fvbm);

}  // namespace cooc
