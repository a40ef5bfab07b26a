#pragma once

// Data-parallel kernels. Each comes as a serial reference and an OpenMP
// version; both produce bitwise identical results, which the tests assert.

#include <cstddef>
#include <span>
#include <vector>

#include "cooc/corpus.hpp"
#include "cooc/scorers.hpp"

namespace cooc {

class CandidateScorer;

namespace kernels {

void set_num_threads(int n);
int max_threads();

/// 1-based rank of each masked target among the non-context candidates,
/// ties broken towards the smaller id.
std::vector<std::size_t> target_ranks_serial(const CandidateScorer& scorer, std::span<const MaskedRecord> masked);
std::vector<std::size_t> target_ranks_parallel(const CandidateScorer& scorer, std::span<const MaskedRecord> masked);

/// Central differences of per_example_loss over every DEM parameter, in
/// DemParams::tensors() order.
std::vector<double> numeric_gradient_serial(const DemParams& params, const ItemSet& record,
                                            std::span<const ItemId> negatives, double epsilon);
std::vector<double> numeric_gradient_parallel(const DemParams& params, const ItemSet& record,
                                              std::span<const ItemId> negatives, double epsilon);

/// per_example_loss of each record with its frozen negatives.
std::vector<double> example_losses_serial(const Model& model, std::span<const ItemSet> records,
                                          std::span<const std::vector<ItemId>> negatives);
std::vector<double> example_losses_parallel(const Model& model, std::span<const ItemSet> records,
                                            std::span<const std::vector<ItemId>> negatives);

}  // namespace kernels
}  // namespace cooc
