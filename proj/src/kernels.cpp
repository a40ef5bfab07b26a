#include "cooc/kernels.hpp"

#include <algorithm>
#include <omp.h>
#include <exception>
#include <stdexcept>

#include "cooc/eval.hpp"
#include "cooc/training.hpp"

namespace cooc::kernels {

void set_num_threads(int n)
{
    if (n > 0)
        omp_set_num_threads(n);
}

int max_threads()
{
    return omp_get_max_threads();
}

std::vector<std::size_t> target_ranks_serial(const CandidateScorer& scorer, std::span<const MaskedRecord> masked)
{
    std::vector<std::size_t> ranks(masked.size());
    std::vector<double> scores(scorer.n_items());
    for (std::size_t r = 0; r < masked.size(); ++r) {
        scorer.score_items(masked[r].context, scores);
        ranks[r] = target_rank(scores, masked[r].context, masked[r].target);
    }
    return ranks;
}

std::vector<std::size_t> target_ranks_parallel(const CandidateScorer& scorer, std::span<const MaskedRecord> masked)
{
    std::vector<std::size_t> ranks(masked.size());
    const auto n = static_cast<std::ptrdiff_t>(masked.size());
    std::exception_ptr error;
#pragma omp parallel
    {
        std::vector<double> scores(scorer.n_items());
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t r = 0; r < n; ++r) {
            try {
                scorer.score_items(masked[r].context, scores);
                ranks[r] = target_rank(scores, masked[r].context, masked[r].target);
            } catch (...) {
#pragma omp critical
                if (!error)
                    error = std::current_exception();
            }
        }
    }
    if (error)
        std::rethrow_exception(error);
    return ranks;
}

namespace {

// Locates flat coordinate k inside the tensor list.
struct FlatIndex {
    std::vector<std::size_t> offsets;  // prefix sums of tensor sizes

    explicit FlatIndex(const DemParams& p)
    {
        offsets.push_back(0);
        for (auto t : p.tensors())
            offsets.push_back(offsets.back() + t.size());
    }
    std::size_t total() const { return offsets.back(); }
    std::pair<std::size_t, std::size_t> locate(std::size_t k) const
    {
        const auto it = std::upper_bound(offsets.begin(), offsets.end(), k);
        const std::size_t tensor = static_cast<std::size_t>(it - offsets.begin()) - 1;
        return {tensor, k - offsets[tensor]};
    }
};

double central_difference(DemParams& work, std::span<double> tensor, std::size_t offset, const ItemSet& record,
                          std::span<const ItemId> negatives, double epsilon)
{
    const double original = tensor[offset];
    tensor[offset] = original + epsilon;
    const double up = per_example_loss(work, record, negatives);
    tensor[offset] = original - epsilon;
    const double down = per_example_loss(work, record, negatives);
    tensor[offset] = original;
    return (up - down) / (2.0 * epsilon);
}

}  // namespace

std::vector<double> numeric_gradient_serial(const DemParams& params, const ItemSet& record,
                                            std::span<const ItemId> negatives, double epsilon)
{
    DemParams work = params;
    auto tensors = work.tensors();
    std::vector<double> grad;
    grad.reserve(params.parameter_count());
    for (auto tensor : tensors)
        for (std::size_t i = 0; i < tensor.size(); ++i)
            grad.push_back(central_difference(work, tensor, i, record, negatives, epsilon));
    return grad;
}

std::vector<double> numeric_gradient_parallel(const DemParams& params, const ItemSet& record,
                                              std::span<const ItemId> negatives, double epsilon)
{
    const FlatIndex index(params);
    std::vector<double> grad(index.total());
    const auto n = static_cast<std::ptrdiff_t>(index.total());
    std::exception_ptr error;
#pragma omp parallel
    {
        DemParams work = params;
        auto tensors = work.tensors();
#pragma omp for schedule(static)
        for (std::ptrdiff_t k = 0; k < n; ++k) {
            try {
                const auto [t, off] = index.locate(static_cast<std::size_t>(k));
                grad[k] = central_difference(work, tensors[t], off, record, negatives, epsilon);
            } catch (...) {
#pragma omp critical
                if (!error)
                    error = std::current_exception();
            }
        }
    }
    if (error)
        std::rethrow_exception(error);
    return grad;
}

std::vector<double> example_losses_serial(const Model& model, std::span<const ItemSet> records,
                                          std::span<const std::vector<ItemId>> negatives)
{
    if (records.size() != negatives.size())
        throw std::invalid_argument("example_losses: one negative list per record required");
    std::vector<double> out(records.size());
    for (std::size_t r = 0; r < records.size(); ++r)
        out[r] = per_example_loss(model, records[r], negatives[r]);
    return out;
}

std::vector<double> example_losses_parallel(const Model& model, std::span<const ItemSet> records,
                                            std::span<const std::vector<ItemId>> negatives)
{
    if (records.size() != negatives.size())
        throw std::invalid_argument("example_losses: one negative list per record required");
    std::vector<double> out(records.size());
    const auto n = static_cast<std::ptrdiff_t>(records.size());
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 32)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        try {
            out[r] = per_example_loss(model, records[r], negatives[r]);
        } catch (...) {
#pragma omp critical
            if (!error)
                error = std::current_exception();
        }
    }
    if (error)
        std::rethrow_exception(error);
    return out;
}

}  // namespace cooc::kernels
