#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cooc {

using ItemId = std::uint32_t;

/// A set of items observed together in one record: strictly increasing ids.
/// Encodes the binary vector v with v_i = 1 iff i is a member.
class ItemSet {
public:
    ItemSet() = default;

    /// Takes ownership of ids that are already sorted and duplicate-free.
    /// Throws std::invalid_argument otherwise.
    static ItemSet from_sorted(std::vector<ItemId> ids);

    std::span<const ItemId> view() const { return items_; }
    const std::vector<ItemId>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    ItemId operator[](std::size_t i) const { return items_[i]; }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    bool contains(ItemId id) const;
    ItemSet without(ItemId id) const;
    ItemSet with(ItemId id) const;

    friend bool operator==(const ItemSet&, const ItemSet&) = default;

private:
    std::vector<ItemId> items_;
};

/// Sorts and deduplicates; throws std::out_of_range if an id is >= n_items.
ItemSet make_itemset(std::span<const ItemId> ids, std::size_t n_items);

struct Vocabulary {
    std::unordered_map<std::string, ItemId> token_to_id;
    std::vector<std::string> id_to_token;
    // Number of records containing each item.
    std::vector<std::uint64_t> occurrence_count;

    std::size_t size() const { return id_to_token.size(); }

    // Returns the id for token, assigning the next id on first appearance.
    ItemId intern(const std::string& token);
    const std::string& token(ItemId id) const { return id_to_token.at(id); }
};

/// Assigns ids in order of first appearance and counts each token at most
/// once per record.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& raw_records);

struct Corpus {
    std::size_t n_items = 0;
    std::vector<ItemSet> records;
    Vocabulary vocab;

    std::size_t n_entries() const;
    bool operator==(const Corpus& other) const
    {
        return n_items == other.n_items && records == other.records;
    }
};

/// Builds a corpus from token records; empty records are dropped.
Corpus corpus_from_tokens(const std::vector<std::vector<std::string>>& raw_records);

/// Recomputes vocab.occurrence_count from the records.
void recount_occurrences(Corpus& corpus);

/// Throws std::invalid_argument if any record is empty, unsorted, or holds an
/// id outside [0, n_items).
void validate(const Corpus& corpus);

struct FoldSplit {
    std::size_t k_folds = 0;
    std::vector<std::size_t> fold_of_record;

    std::vector<std::size_t> fold_sizes() const;
    std::vector<std::size_t> records_in(std::size_t fold) const;
    std::vector<std::size_t> records_not_in(std::size_t fold) const;
};

/// Seeded uniform permutation of the records followed by round-robin
/// assignment, so fold sizes differ by at most one.
FoldSplit split_folds(const Corpus& corpus, std::size_t k_folds, std::uint64_t seed);

struct MaskedRecord {
    ItemSet context;
    ItemId target = 0;
};

/// Removes one uniformly chosen item. Records with fewer than two items are
/// rejected with std::invalid_argument.
MaskedRecord mask_one_item(const ItemSet& record, std::uint64_t seed);

}  // namespace cooc
