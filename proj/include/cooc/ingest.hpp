#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "cooc/corpus.hpp"

namespace cooc {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Which neighbours of a node form its record in a directed graph.
enum class EdgeDirection { Out, In, Both };

EdgeDirection parse_edge_direction(const std::string& s);

/// SNAP-style edge list: "src<ws>dst" per line, '#' starts a comment line.
/// Every node gets an id (first-appearance order over src then dst); one
/// record per node that has at least one neighbour in the chosen direction.
Corpus read_edge_list(std::istream& in, EdgeDirection direction = EdgeDirection::Out);

/// One transaction per line of whitespace-separated integer item ids.
Corpus read_transactions(std::istream& in);

/// Writes records back in transaction format using vocabulary tokens.
void write_transactions(const Corpus& corpus, std::ostream& out);

/// "user::movie::rating::timestamp"; a movie joins the user's record when
/// rating >= threshold.
Corpus read_movielens(std::istream& in, double threshold = 4.0);

/// Dense CSV: first column is the number of rated jokes, then one column per
/// joke, 99 marking "not rated". A joke joins the user's record when its
/// rating is strictly above threshold. Item id = joke column index.
Corpus read_jester(std::istream& in, double threshold = 0.0);

/// Keeps the m most frequent items (ties towards the smaller id), renumbers the
/// survivors densely in their original order and drops records left empty.
Corpus keep_top_items(const Corpus& corpus, std::size_t m);

}  // namespace cooc
