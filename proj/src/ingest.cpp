#include "cooc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cooc {

namespace {

std::string_view trim(std::string_view s)
{
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && is_space(s.back()))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r')
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::vector<std::string_view> split_on(std::string_view s, std::string_view sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + sep.size();
    }
}

bool parse_int(std::string_view s, long long& value)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

// std::from_chars for double is unavailable in some libstdc++ builds.
bool parse_real(std::string_view s, double& value)
{
    s = trim(s);
    if (s.empty())
        return false;
    std::string buf(s);
    char* end = nullptr;
    value = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size();
}

std::string canonical_int(std::string_view tok, std::size_t line)
{
    long long v = 0;
    if (!parse_int(tok, v))
        throw ParseError(line, "expected an integer, got '" + std::string(tok) + "'");
    return std::to_string(v);
}

}  // namespace

EdgeDirection parse_edge_direction(const std::string& s)
{
    if (s == "out")
        return EdgeDirection::Out;
    if (s == "in")
        return EdgeDirection::In;
    if (s == "both")
        return EdgeDirection::Both;
    throw std::invalid_argument("edge direction must be out, in or both, got '" + s + "'");
}

Corpus read_edge_list(std::istream& in, EdgeDirection direction)
{
    Corpus corpus;
    std::vector<std::vector<ItemId>> neighbours;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#')
            continue;
        auto fields = split_ws(s);
        if (fields.size() != 2)
            throw ParseError(line_no, "expected 'src dst', got " + std::to_string(fields.size()) + " fields");
        const ItemId src = corpus.vocab.intern(canonical_int(fields[0], line_no));
        const ItemId dst = corpus.vocab.intern(canonical_int(fields[1], line_no));
        if (neighbours.size() < corpus.vocab.size())
            neighbours.resize(corpus.vocab.size());
        if (direction != EdgeDirection::In)
            neighbours[src].push_back(dst);
        if (direction != EdgeDirection::Out)
            neighbours[dst].push_back(src);
    }
    corpus.n_items = corpus.vocab.size();
    neighbours.resize(corpus.n_items);
    for (auto& nb : neighbours) {
        if (nb.empty())
            continue;
        corpus.records.push_back(make_itemset(nb, corpus.n_items));
    }
    recount_occurrences(corpus);
    return corpus;
}

Corpus read_transactions(std::istream& in)
{
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    std::vector<ItemId> ids;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_ws(line);
        if (fields.empty())
            continue;
        ids.clear();
        for (auto tok : fields)
            ids.push_back(corpus.vocab.intern(canonical_int(tok, line_no)));
        corpus.records.push_back(make_itemset(ids, corpus.vocab.size()));
    }
    corpus.n_items = corpus.vocab.size();
    recount_occurrences(corpus);
    return corpus;
}

void write_transactions(const Corpus& corpus, std::ostream& out)
{
    for (const auto& rec : corpus.records) {
        bool first = true;
        for (ItemId id : rec) {
            if (!first)
                out << ' ';
            out << (id < corpus.vocab.size() ? corpus.vocab.token(id) : std::to_string(id));
            first = false;
        }
        out << '\n';
    }
}

Corpus read_movielens(std::istream& in, double threshold)
{
    std::unordered_map<std::string, std::size_t> user_index;
    std::vector<std::vector<std::string>> raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = trim(line);
        if (s.empty())
            continue;
        auto fields = split_on(s, "::");
        if (fields.size() != 4)
            throw ParseError(line_no, "expected 'user::movie::rating::timestamp'");
        long long user = 0, movie = 0;
        double rating = 0.0;
        if (!parse_int(fields[0], user) || !parse_int(fields[1], movie) || !parse_real(fields[2], rating))
            throw ParseError(line_no, "malformed rating line");
        if (rating < threshold)
            continue;
        auto [it, inserted] = user_index.try_emplace(std::to_string(user), raw.size());
        if (inserted)
            raw.emplace_back();
        raw[it->second].push_back(std::to_string(movie));
    }
    return corpus_from_tokens(raw);
}

Corpus read_jester(std::istream& in, double threshold)
{
    constexpr double kUnrated = 99.0;
    std::vector<std::vector<ItemId>> rows;
    std::size_t n_columns = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = trim(line);
        if (s.empty())
            continue;
        auto fields = split_on(s, ",");
        if (fields.size() < 2)
            throw ParseError(line_no, "expected a count column followed by ratings");
        double count = 0.0;
        if (!parse_real(fields[0], count))
            throw ParseError(line_no, "malformed count column");
        std::vector<ItemId> liked;
        for (std::size_t j = 1; j < fields.size(); ++j) {
            double rating = 0.0;
            if (!parse_real(fields[j], rating))
                throw ParseError(line_no, "malformed rating in column " + std::to_string(j + 1));
            if (rating == kUnrated)
                continue;
            if (rating > threshold)
                liked.push_back(static_cast<ItemId>(j - 1));
        }
        n_columns = std::max(n_columns, fields.size() - 1);
        if (!liked.empty())
            rows.push_back(std::move(liked));
    }
    Corpus corpus;
    corpus.n_items = n_columns;
    for (std::size_t j = 0; j < n_columns; ++j)
        corpus.vocab.intern(std::to_string(j));
    for (auto& r : rows)
        corpus.records.push_back(ItemSet::from_sorted(std::move(r)));
    recount_occurrences(corpus);
    return corpus;
}

Corpus keep_top_items(const Corpus& corpus, std::size_t m)
{
    std::vector<std::uint64_t> freq(corpus.n_items, 0);
    for (const auto& r : corpus.records)
        for (ItemId id : r)
            ++freq[id];
    std::vector<ItemId> order(corpus.n_items);
    std::iota(order.begin(), order.end(), ItemId{0});
    std::stable_sort(order.begin(), order.end(), [&](ItemId a, ItemId b) { return freq[a] > freq[b]; });
    order.resize(std::min(m, order.size()));
    std::sort(order.begin(), order.end());

    constexpr ItemId kDropped = ~ItemId{0};
    std::vector<ItemId> remap(corpus.n_items, kDropped);
    Corpus out;
    out.n_items = order.size();
    for (std::size_t k = 0; k < order.size(); ++k) {
        remap[order[k]] = static_cast<ItemId>(k);
        const std::string tok = order[k] < corpus.vocab.size() ? corpus.vocab.token(order[k])
                                                               : std::to_string(order[k]);
        out.vocab.intern(tok);
    }
    for (const auto& r : corpus.records) {
        std::vector<ItemId> kept;
        for (ItemId id : r)
            if (remap[id] != kDropped)
                kept.push_back(remap[id]);
        if (!kept.empty())
            out.records.push_back(ItemSet::from_sorted(std::move(kept)));
    }
    recount_occurrences(out);
    return out;
}

}  // namespace cooc
