#pragma once

// Binary containers. All integers and doubles are little-endian.
//
// Corpus file:
//   "COOCCORP" | u32 version | u64 n_items | u64 n_records
//   per record: u32 length | length x u32 sorted ids
// Vocabulary sidecar (<corpus>.vocab): one "token<TAB>count" line per id.
//
// Checkpoint file:
//   "COOCCKPT" | u32 version | u32 model kind | u64 n_items | kind header
//   | parameter tensors, row-major doubles | u64 FNV-1a checksum of all
//   preceding bytes
// Kind headers: l1, fvbm: none. lbl: u64 dim, u8 use_bias.
//   dem: u64 layer count, u64 width per layer.
// Tensor order: l1: bias. fvbm: bias, pair (N x N). lbl: bias, embed (N x d).
//   dem: DemParams::tensors() order.

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "cooc/corpus.hpp"
#include "cooc/scorers.hpp"
#include "cooc/training.hpp"

namespace cooc {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCorpusVersion = 1;
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_corpus(std::ostream& out, const Corpus& corpus);
Corpus read_corpus(std::istream& in);

void write_vocabulary(std::ostream& out, const Vocabulary& vocab);
Vocabulary read_vocabulary(std::istream& in);

/// Writes <path> and <path>.vocab.
void save_corpus(const std::string& path, const Corpus& corpus);
/// Reads <path> and, when present, <path>.vocab.
Corpus load_corpus(const std::string& path);

void write_checkpoint(std::ostream& out, const Model& model);
Model read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Model& model);
Model load_checkpoint(const std::string& path);

/// One row per item: token then the concatenated readout rows R^1_t .. R^k_t,
/// tab separated, printed with round-trip precision. Zero-layer models
/// throw std::invalid_argument.
void write_embeddings(std::ostream& out, const DemParams& params, const Vocabulary* vocab);

void write_trace(std::ostream& out, const TrainingTrace& trace);

}  // namespace cooc
