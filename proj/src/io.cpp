#include "cooc/io.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace cooc {

namespace {

constexpr std::array<char, 8> kCorpusMagic{'C', 'O', 'O', 'C', 'C', 'O', 'R', 'P'};
constexpr std::array<char, 8> kCheckpointMagic{'C', 'O', 'O', 'C', 'C', 'K', 'P', 'T'};

// Little-endian byte sink with a running FNV-1a hash.
class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void bytes(const char* p, std::size_t n)
    {
        for (std::size_t i = 0; i < n; ++i) {
            hash_ ^= static_cast<unsigned char>(p[i]);
            hash_ *= 0x100000001b3ULL;
        }
        out_.write(p, static_cast<std::streamsize>(n));
    }
    template <typename U>
    void uint(U v)
    {
        char buf[sizeof(U)];
        for (std::size_t i = 0; i < sizeof(U); ++i)
            buf[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
        bytes(buf, sizeof(U));
    }
    void real(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
    void reals(std::span<const double> vs)
    {
        for (double v : vs)
            real(v);
    }
    std::uint64_t hash() const { return hash_; }

private:
    std::ostream& out_;
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    void bytes(char* p, std::size_t n)
    {
        in_.read(p, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw FormatError("unexpected end of file");
        for (std::size_t i = 0; i < n; ++i) {
            hash_ ^= static_cast<unsigned char>(p[i]);
            hash_ *= 0x100000001b3ULL;
        }
    }
    template <typename U>
    U uint()
    {
        unsigned char buf[sizeof(U)];
        bytes(reinterpret_cast<char*>(buf), sizeof(U));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return static_cast<U>(v);
    }
    double real() { return std::bit_cast<double>(uint<std::uint64_t>()); }
    void reals(std::span<double> vs)
    {
        for (double& v : vs)
            v = real();
    }
    std::uint64_t hash() const { return hash_; }

private:
    std::istream& in_;
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

void expect_magic(Reader& r, const std::array<char, 8>& magic, const char* what)
{
    std::array<char, 8> got{};
    r.bytes(got.data(), got.size());
    if (got != magic)
        throw FormatError(std::string("not a ") + what + " file (bad magic)");
}

// Guards allocations driven by untrusted header fields.
std::uint64_t checked_size(std::uint64_t v, std::uint64_t limit, const char* what)
{
    if (v > limit)
        throw FormatError(std::string("implausible ") + what + " in header");
    return v;
}

constexpr std::uint64_t kMaxItems = std::uint64_t{1} << 31;
constexpr std::uint64_t kMaxWidth = std::uint64_t{1} << 24;

}  // namespace

void write_corpus(std::ostream& out, const Corpus& corpus)
{
    Writer w(out);
    w.bytes(kCorpusMagic.data(), kCorpusMagic.size());
    w.uint<std::uint32_t>(kCorpusVersion);
    w.uint<std::uint64_t>(corpus.n_items);
    w.uint<std::uint64_t>(corpus.records.size());
    for (const auto& rec : corpus.records) {
        w.uint<std::uint32_t>(static_cast<std::uint32_t>(rec.size()));
        for (ItemId id : rec)
            w.uint<std::uint32_t>(id);
    }
}

Corpus read_corpus(std::istream& in)
{
    Reader r(in);
    expect_magic(r, kCorpusMagic, "corpus");
    const auto version = r.uint<std::uint32_t>();
    if (version != kCorpusVersion)
        throw FormatError("unsupported corpus version " + std::to_string(version));
    Corpus corpus;
    corpus.n_items = checked_size(r.uint<std::uint64_t>(), kMaxItems, "item count");
    const auto n_records = r.uint<std::uint64_t>();
    for (std::uint64_t k = 0; k < n_records; ++k) {
        const auto len = checked_size(r.uint<std::uint32_t>(), corpus.n_items, "record length");
        std::vector<ItemId> ids(len);
        for (auto& id : ids)
            id = r.uint<std::uint32_t>();
        try {
            corpus.records.push_back(ItemSet::from_sorted(std::move(ids)));
        } catch (const std::invalid_argument&) {
            throw FormatError("record " + std::to_string(k) + " is not strictly increasing");
        }
    }
    try {
        validate(corpus);
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
    recount_occurrences(corpus);
    return corpus;
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab)
{
    for (std::size_t i = 0; i < vocab.size(); ++i)
        out << vocab.id_to_token[i] << '\t' << (i < vocab.occurrence_count.size() ? vocab.occurrence_count[i] : 0)
            << '\n';
}

Vocabulary read_vocabulary(std::istream& in)
{
    Vocabulary vocab;
    std::string line;
    while (std::getline(in, line)) {
        const auto tab = line.rfind('\t');
        if (tab == std::string::npos)
            throw FormatError("vocabulary line without a tab: '" + line + "'");
        const ItemId id = vocab.intern(line.substr(0, tab));
        vocab.occurrence_count[id] = std::stoull(line.substr(tab + 1));
    }
    return vocab;
}

void save_corpus(const std::string& path, const Corpus& corpus)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    write_corpus(out, corpus);
    std::ofstream vout(path + ".vocab");
    if (!vout)
        throw std::runtime_error("cannot write " + path + ".vocab");
    write_vocabulary(vout, corpus.vocab);
    if (!out || !vout)
        throw std::runtime_error("write failed for " + path);
}

Corpus load_corpus(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open corpus " + path);
    Corpus corpus = read_corpus(in);
    std::ifstream vin(path + ".vocab");
    if (vin) {
        Vocabulary vocab = read_vocabulary(vin);
        if (vocab.size() != corpus.n_items)
            throw FormatError("vocabulary size does not match the corpus item count");
        vocab.occurrence_count = corpus.vocab.occurrence_count;
        corpus.vocab = std::move(vocab);
    } else {
        corpus.vocab = Vocabulary{};
        for (std::size_t i = 0; i < corpus.n_items; ++i)
            corpus.vocab.intern(std::to_string(i));
        recount_occurrences(corpus);
    }
    return corpus;
}

void write_checkpoint(std::ostream& out, const Model& model)
{
    Writer w(out);
    w.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
    w.uint<std::uint32_t>(kCheckpointVersion);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(kind_of(model)));
    w.uint<std::uint64_t>(n_items(model));
    struct Visitor {
        Writer& w;
        void operator()(const BiasParams& p) { w.reals(p.bias); }
        void operator()(const PairParams& p)
        {
            w.reals(p.bias);
            w.reals(p.pair.data);
        }
        void operator()(const LblParams& p)
        {
            w.uint<std::uint64_t>(p.embed.cols);
            w.uint<std::uint8_t>(p.use_bias ? 1 : 0);
            w.reals(p.bias);
            w.reals(p.embed.data);
        }
        void operator()(const DemParams& p)
        {
            w.uint<std::uint64_t>(p.layers.size());
            for (std::size_t h : p.layer_sizes())
                w.uint<std::uint64_t>(h);
            for (auto t : p.tensors())
                w.reals(t);
        }
    };
    std::visit(Visitor{w}, model);
    const std::uint64_t checksum = w.hash();
    w.uint<std::uint64_t>(checksum);
}

Model read_checkpoint(std::istream& in)
{
    Reader r(in);
    expect_magic(r, kCheckpointMagic, "checkpoint");
    const auto version = r.uint<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    const auto kind = r.uint<std::uint32_t>();
    const std::size_t n = checked_size(r.uint<std::uint64_t>(), kMaxItems, "item count");
    Model model;
    switch (static_cast<ModelKind>(kind)) {
    case ModelKind::L1: {
        BiasParams p{std::vector<double>(n)};
        r.reals(p.bias);
        model = std::move(p);
        break;
    }
    case ModelKind::Fvbm: {
        PairParams p{std::vector<double>(n), Matrix(n, n)};
        r.reals(p.bias);
        r.reals(p.pair.data);
        model = std::move(p);
        break;
    }
    case ModelKind::Lbl: {
        const std::size_t d = checked_size(r.uint<std::uint64_t>(), kMaxWidth, "embedding width");
        const bool use_bias = r.uint<std::uint8_t>() != 0;
        LblParams p{std::vector<double>(n), Matrix(n, d), use_bias};
        r.reals(p.bias);
        r.reals(p.embed.data);
        model = std::move(p);
        break;
    }
    case ModelKind::Dem: {
        const std::size_t n_layers = checked_size(r.uint<std::uint64_t>(), 64, "layer count");
        std::vector<std::size_t> sizes(n_layers);
        for (auto& s : sizes)
            s = checked_size(r.uint<std::uint64_t>(), kMaxWidth, "layer width");
        DemParams p = DemParams::zeros(n, sizes);
        for (auto t : p.tensors())
            r.reals(t);
        model = std::move(p);
        break;
    }
    default:
        throw FormatError("unknown model kind " + std::to_string(kind));
    }
    const std::uint64_t expected = r.hash();
    if (r.uint<std::uint64_t>() != expected)
        throw FormatError("checkpoint checksum mismatch");
    return model;
}

void save_checkpoint(const std::string& path, const Model& model)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    write_checkpoint(out, model);
    if (!out)
        throw std::runtime_error("write failed for " + path);
}

Model load_checkpoint(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open checkpoint " + path);
    return read_checkpoint(in);
}

void write_embeddings(std::ostream& out, const DemParams& params, const Vocabulary* vocab)
{
    if (params.layers.empty())
        throw std::invalid_argument("model has no hidden layers, nothing to export");
    char buf[32];
    for (std::size_t t = 0; t < params.n_items(); ++t) {
        if (vocab && t < vocab->size())
            out << vocab->token(static_cast<ItemId>(t));
        else
            out << t;
        for (const auto& r : params.readouts)
            for (double v : r.row(t)) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << '\t' << buf;
            }
        out << '\n';
    }
}

void write_trace(std::ostream& out, const TrainingTrace& trace)
{
    out << "epoch\tloss\tseconds\n";
    char buf[64];
    for (std::size_t e = 0; e < trace.epoch_losses.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%zu\t%.10g\t%.3f\n", e + 1, trace.epoch_losses[e], trace.wall_times[e]);
        out << buf;
    }
}

}  // namespace cooc
