#pragma once
// Transfer learning: reuse a source-trained model on a target corpus.
//   complete — the frozen source model predicts the whole target corpus,
//              encoded with the source vocabulary; zero parameter updates.
//   feature  — a fresh target model starts from the source's trained
//              embedding rows for shared tokens, then cross-validates.
//   model    — feature plus every non-embedding tensor copied verbatim
//              (the output layer only when the class counts agree), then
//              fine-tuned under the same cross-validation.

#include <cstdint>
#include <string>
#include <vector>

#include "cbd/datasets.hpp"
#include "cbd/evaluation.hpp"
#include "cbd/experiment.hpp"
#include "cbd/model.hpp"
#include "cbd/text.hpp"

namespace cbd {

// Maps each source class index to a target class index.  Classes map by
// name; leftover source classes fold into the target's positive class, which
// requires a binary target whose negative class is named "none" (and a
// source that also carries "none").  Anything else is irreconcilable.
std::vector<std::size_t> class_mapping(const std::vector<std::string>& source_classes,
                                       const std::vector<std::string>& target_classes);

struct VocabMergeReport {
    std::size_t shared = 0;       // target tokens whose rows came from the source
    std::size_t target_only = 0;  // target tokens absent from the source vocabulary
};

// Copies source embedding rows into `target` for every token the two
// vocabularies share (looked up by string; reserved rows stay put).
// Dimensions must agree.
VocabMergeReport copy_shared_embedding_rows(ModelBundle& target, const Vocabulary& target_vocab,
                                            const ModelBundle& source,
                                            const Vocabulary& source_vocab);

// Copies every non-embedding tensor from source to target by name.  The
// dense output layer transfers only when the class counts match (returns
// whether it did); any other shape mismatch is a configuration error.
bool copy_non_embedding_params(ModelBundle& target, const ModelBundle& source);

// Identity columns for the emitted rows.
struct TransferTags {
    std::string target_dataset;
    std::string source_dataset;
    std::string embedding;  // tag of the source run's embedding initialization
    std::uint64_t seed = 0;
    std::string mode = "strict";
};

struct TransferResult {
    std::vector<EvalRow> rows;
    std::vector<VocabMergeReport> merges;  // one per fold (empty for complete)
    CvOutcome cv;                          // fold detail (empty for complete)
};

// Evaluates the frozen source model on the whole target corpus.  One "mean"
// row per target class; the source bundle is never written to.
TransferResult transfer_complete(const ModelBundle& source, const Vocabulary& source_vocab,
                                 const LabeledCorpus& target, const StopwordSet& stopwords,
                                 const TransferTags& tags);

// Cross-validates a fresh target model whose shared embedding rows are
// seeded from the source.  `options.dim` must equal the source embedding
// dimension; architecture is free.
TransferResult transfer_feature_level(const ModelBundle& source, const Vocabulary& source_vocab,
                                      const LabeledCorpus& target, const StopwordSet& stopwords,
                                      const CvOptions& options, const TransferTags& tags);

// Feature-level plus verbatim non-embedding weights; architecture and layer
// shapes must match the source.
TransferResult transfer_model_level(const ModelBundle& source, const Vocabulary& source_vocab,
                                    const LabeledCorpus& target, const StopwordSet& stopwords,
                                    const CvOptions& options, const TransferTags& tags);

}  // namespace cbd
