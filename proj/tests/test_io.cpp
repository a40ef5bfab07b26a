#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "cooc/io.hpp"
#include "random_models.hpp"

using namespace cooc;

namespace {

Corpus sample_corpus()
{
    return corpus_from_tokens({{"apple", "pear"}, {"pear"}, {"kiwi", "apple", "fig"}});
}

std::string checkpoint_bytes(const Model& m)
{
    std::ostringstream out(std::ios::binary);
    write_checkpoint(out, m);
    return out.str();
}

Model from_bytes(const std::string& bytes)
{
    std::istringstream in(bytes, std::ios::binary);
    return read_checkpoint(in);
}

}  // namespace

TEST(CorpusFile, RoundTrip)
{
    const Corpus c = sample_corpus();
    std::ostringstream out(std::ios::binary);
    write_corpus(out, c);
    std::istringstream in(out.str(), std::ios::binary);
    EXPECT_EQ(read_corpus(in), c);
    EXPECT_EQ(out.str().substr(0, 8), "COOCCORP");
}

TEST(CorpusFile, SaveLoadWithVocabulary)
{
    const auto path = (std::filesystem::temp_directory_path() / "cooc_io_test.corpus").string();
    const Corpus c = sample_corpus();
    save_corpus(path, c);
    const Corpus back = load_corpus(path);
    EXPECT_EQ(back, c);
    EXPECT_EQ(back.vocab.id_to_token, c.vocab.id_to_token);
    EXPECT_EQ(back.vocab.occurrence_count, c.vocab.occurrence_count);
    std::filesystem::remove(path + ".vocab");
    const Corpus bare = load_corpus(path);
    EXPECT_EQ(bare.vocab.token(2), "2");
    std::filesystem::remove(path);
}

TEST(CorpusFile, Rejections)
{
    std::istringstream bad_magic(std::string("NOTCORPS") + std::string(20, '\0'));
    EXPECT_THROW(read_corpus(bad_magic), FormatError);

    std::ostringstream out(std::ios::binary);
    write_corpus(out, sample_corpus());
    std::string bytes = out.str();
    bytes[8] = 9;  // version
    std::istringstream bad_version(bytes);
    EXPECT_THROW(read_corpus(bad_version), FormatError);

    std::istringstream truncated(out.str().substr(0, out.str().size() - 2));
    EXPECT_THROW(read_corpus(truncated), FormatError);
}

TEST(Checkpoint, RoundTripEveryKind)
{
    Rng rng(5);
    LblParams lbl{std::vector<double>(6, 0.25), Matrix(6, 3, -0.5), false};
    const std::vector<Model> models{BiasParams{{0.1, -0.2, 0.3}}, Model{fixtures::random_fvbm(5, rng)}, Model{lbl},
                                    Model{fixtures::random_dem(7, {4, 2}, rng)},
                                    Model{fixtures::random_dem(7, {}, rng)}};
    for (const Model& m : models) {
        const std::string bytes = checkpoint_bytes(m);
        EXPECT_EQ(bytes.substr(0, 8), "COOCCKPT");
        EXPECT_EQ(from_bytes(bytes), m);
    }
}

TEST(Checkpoint, RejectsCorruption)
{
    Rng rng(6);
    const std::string good = checkpoint_bytes(Model{fixtures::random_dem(5, {3}, rng)});
    std::string flipped = good;
    flipped[good.size() / 2] ^= 0x1;
    EXPECT_THROW(from_bytes(flipped), FormatError);
    std::string version = good;
    version[8] = 2;
    EXPECT_THROW(from_bytes(version), FormatError);
    std::string magic = good;
    magic[0] = 'X';
    EXPECT_THROW(from_bytes(magic), FormatError);
    EXPECT_THROW(from_bytes(good.substr(0, good.size() - 9)), FormatError);
    EXPECT_THROW(from_bytes(""), FormatError);
}

TEST(Embeddings, ConcatenatedReadouts)
{
    Rng rng(2);
    const DemParams p = fixtures::random_dem(4, {3, 2}, rng);
    std::ostringstream out;
    write_embeddings(out, p, nullptr);
    std::istringstream lines(out.str());
    std::string line;
    std::size_t row = 0;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string token;
        fields >> token;
        EXPECT_EQ(token, std::to_string(row));
        std::vector<double> values;
        double v;
        while (fields >> v)
            values.push_back(v);
        ASSERT_EQ(values.size(), 5u);
        EXPECT_EQ(values[0], p.readouts[0](row, 0));
        EXPECT_EQ(values[4], p.readouts[1](row, 1));
        ++row;
    }
    EXPECT_EQ(row, 4u);
    EXPECT_THROW(write_embeddings(out, fixtures::random_dem(4, {}, rng), nullptr), std::invalid_argument);
}

TEST(Trace, OneLinePerEpoch)
{
    TrainingTrace t{{1.5, 1.25}, {0.1, 0.2}};
    std::ostringstream out;
    write_trace(out, t);
    const std::string s = out.str();
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
}
