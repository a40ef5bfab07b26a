#include "cooc/corpus.hpp"

#include <algorithm>
#include <numeric>

#include "cooc/rng.hpp"

namespace cooc {

ItemSet ItemSet::from_sorted(std::vector<ItemId> ids)
{
    for (std::size_t i = 1; i < ids.size(); ++i)
        if (ids[i - 1] >= ids[i])
            throw std::invalid_argument("ItemSet: ids must be strictly increasing");
    ItemSet s;
    s.items_ = std::move(ids);
    return s;
}

bool ItemSet::contains(ItemId id) const
{
    return std::binary_search(items_.begin(), items_.end(), id);
}

ItemSet ItemSet::without(ItemId id) const
{
    ItemSet s;
    s.items_.reserve(items_.size());
    for (ItemId x : items_)
        if (x != id)
            s.items_.push_back(x);
    return s;
}

ItemSet ItemSet::with(ItemId id) const
{
    ItemSet s = *this;
    auto it = std::lower_bound(s.items_.begin(), s.items_.end(), id);
    if (it == s.items_.end() || *it != id)
        s.items_.insert(it, id);
    return s;
}

ItemSet make_itemset(std::span<const ItemId> ids, std::size_t n_items)
{
    std::vector<ItemId> v(ids.begin(), ids.end());
    for (ItemId id : v)
        if (id >= n_items)
            throw std::out_of_range("item id " + std::to_string(id) + " out of range [0, " +
                                    std::to_string(n_items) + ")");
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return ItemSet::from_sorted(std::move(v));
}

ItemId Vocabulary::intern(const std::string& token)
{
    auto [it, inserted] = token_to_id.try_emplace(token, static_cast<ItemId>(id_to_token.size()));
    if (inserted) {
        id_to_token.push_back(token);
        occurrence_count.push_back(0);
    }
    return it->second;
}

namespace {

// Interns one raw record and returns its item set.
ItemSet intern_record(Vocabulary& vocab, const std::vector<std::string>& tokens)
{
    std::vector<ItemId> ids;
    ids.reserve(tokens.size());
    for (const auto& tok : tokens)
        ids.push_back(vocab.intern(tok));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (ItemId id : ids)
        ++vocab.occurrence_count[id];
    return ItemSet::from_sorted(std::move(ids));
}

}  // namespace

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& raw_records)
{
    Vocabulary vocab;
    for (const auto& rec : raw_records)
        intern_record(vocab, rec);
    return vocab;
}

Corpus corpus_from_tokens(const std::vector<std::vector<std::string>>& raw_records)
{
    Corpus corpus;
    for (const auto& rec : raw_records) {
        ItemSet s = intern_record(corpus.vocab, rec);
        if (!s.empty())
            corpus.records.push_back(std::move(s));
    }
    corpus.n_items = corpus.vocab.size();
    return corpus;
}

std::size_t Corpus::n_entries() const
{
    std::size_t n = 0;
    for (const auto& r : records)
        n += r.size();
    return n;
}

void recount_occurrences(Corpus& corpus)
{
    corpus.vocab.occurrence_count.assign(corpus.n_items, 0);
    for (const auto& r : corpus.records)
        for (ItemId id : r)
            ++corpus.vocab.occurrence_count[id];
}

void validate(const Corpus& corpus)
{
    for (std::size_t r = 0; r < corpus.records.size(); ++r) {
        const auto& rec = corpus.records[r];
        if (rec.empty())
            throw std::invalid_argument("record " + std::to_string(r) + " is empty");
        for (std::size_t i = 0; i < rec.size(); ++i) {
            if (rec[i] >= corpus.n_items)
                throw std::invalid_argument("record " + std::to_string(r) + " holds out-of-range id");
            if (i > 0 && rec[i - 1] >= rec[i])
                throw std::invalid_argument("record " + std::to_string(r) + " is not strictly increasing");
        }
    }
}

std::vector<std::size_t> FoldSplit::fold_sizes() const
{
    std::vector<std::size_t> sizes(k_folds, 0);
    for (std::size_t f : fold_of_record)
        ++sizes[f];
    return sizes;
}

std::vector<std::size_t> FoldSplit::records_in(std::size_t fold) const
{
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < fold_of_record.size(); ++r)
        if (fold_of_record[r] == fold)
            out.push_back(r);
    return out;
}

std::vector<std::size_t> FoldSplit::records_not_in(std::size_t fold) const
{
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < fold_of_record.size(); ++r)
        if (fold_of_record[r] != fold)
            out.push_back(r);
    return out;
}

FoldSplit split_folds(const Corpus& corpus, std::size_t k_folds, std::uint64_t seed)
{
    const std::size_t n = corpus.records.size();
    if (k_folds < 2)
        throw std::invalid_argument("split_folds: k_folds must be at least 2");
    if (n == 0)
        throw std::invalid_argument("split_folds: corpus is empty");
    if (k_folds > n)
        throw std::invalid_argument("split_folds: more folds (" + std::to_string(k_folds) +
                                    ") than records (" + std::to_string(n) + ")");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "split"));
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_index(i + 1)]);

    FoldSplit split;
    split.k_folds = k_folds;
    split.fold_of_record.resize(n);
    for (std::size_t pos = 0; pos < n; ++pos)
        split.fold_of_record[perm[pos]] = pos % k_folds;
    return split;
}

MaskedRecord mask_one_item(const ItemSet& record, std::uint64_t seed)
{
    if (record.size() < 2)
        throw std::invalid_argument("mask_one_item: record has fewer than two items");
    Rng rng(derive_seed(seed, "mask"));
    const ItemId target = record[rng.uniform_index(record.size())];
    return MaskedRecord{record.without(target), target};
}

}  // namespace cooc
