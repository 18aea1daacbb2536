#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbd/rng.hpp"
#include "cbd/tensor.hpp"
#include "cbd/text.hpp"

namespace cbd {

// Initial V×d word-embedding matrix. Row 0 (PAD) is always zero and the
// training loop masks its gradient; every other row is trainable.
template <typename T>
struct EmbeddingMatrixT {
    TensorT<T> matrix;
    std::vector<std::uint8_t> from_file; // per row: 1 = vector read from a file
    double coverage = 0.0;               // matched real tokens / (V - 2)
};

using EmbeddingMatrix = EmbeddingMatrixT<float>;

// Rows 1.. drawn i.i.d. uniform in [-0.05, 0.05]; deterministic per rng state.
template <typename T>
EmbeddingMatrixT<T> init_random_embedding(const Vocabulary& vocab, std::size_t d, Rng& rng);

// Word-vector text file: one token followed by d decimal numbers per line; an
// optional leading header of exactly two integers is skipped. Vocabulary
// tokens found in the file take the file vector; the rest keep the random
// initialization. Malformed lines and dimension mismatches are fatal.
template <typename T>
EmbeddingMatrixT<T> load_pretrained_embedding(const std::string& path,
                                              const Vocabulary& vocab, std::size_t d,
                                              Rng& rng);

} // namespace cbd
