#pragma once
// Cross-validated experiment driver: one grid cell = one stratified k-fold
// run of an architecture/embedding combination over a corpus.  Also trains
// the full-corpus models that transfer jobs consume.  Deterministic given
// the seed; every fold derives its own seed stream.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cbd/datasets.hpp"
#include "cbd/embeddings.hpp"
#include "cbd/evaluation.hpp"
#include "cbd/model.hpp"
#include "cbd/text.hpp"

namespace cbd {

// Builds the initial embedding matrix for a fold's vocabulary.
using EmbeddingInit =
    std::function<EmbeddingMatrix(const Vocabulary& vocab, std::size_t dim, Rng& rng)>;

EmbeddingInit random_embedding_init();
EmbeddingInit pretrained_embedding_init(std::string path);

struct CvOptions {
    std::size_t k = 5;
    FoldConfig fold_config;
    Hyperparams hp;
    std::size_t dim = 50;
    std::uint64_t seed = 0;
    // When set, the fold plan uses this seed instead of one derived from
    // `seed` — lets a whole experiment grid share one plan per dataset.
    std::optional<std::uint64_t> fold_seed;
    Architecture arch = Architecture::BlstmAttn;
    EmbeddingInit embedding = random_embedding_init();
    std::string dataset_tag;
    // Applied to each fold's freshly built model before training; the
    // transfer paths plant source parameters here.
    std::function<void(ModelBundle&, const Vocabulary&)> customize;
};

struct FoldMetrics {
    std::size_t fold = 0;
    ConfusionMatrix counts;
    std::vector<Prf> per_class;  // indexed like classes
};

struct CvOutcome {
    std::vector<std::string> classes;
    std::vector<FoldMetrics> folds;
    ConfusionMatrix pooled_counts;
    std::vector<Prf> mean_per_class;    // arithmetic mean over folds
    std::vector<Prf> pooled_per_class;  // recomputed from pooled counts
};

// Stratified k-fold cross validation: in strict mode each fold's vocabulary
// and sequence length come from its training split alone; in fidelity mode
// they are fitted on the whole (oversampled) corpus, reproducing the
// reference workflow.
CvOutcome run_cv(const LabeledCorpus& corpus, const StopwordSet& stopwords,
                 const CvOptions& options);

// Full-corpus training without a held-out split — the source model of a
// transfer job.  Oversampling from `fold_config` applies to the whole corpus.
struct FullTrainResult {
    ModelBundle bundle;
    Vocabulary vocab;
    TrainHistory history;
};

FullTrainResult train_full(const LabeledCorpus& corpus, const StopwordSet& stopwords,
                           const CvOptions& options);

// The identity columns attached to every results.csv row of one cell.
struct CellTags {
    std::string dataset;
    bool oversampled = false;
    std::string architecture;
    std::string embedding;
    std::size_t dim = 50;
    std::uint64_t seed = 0;
    std::string mode;
    std::string approach;        // transfer rows only
    std::string source_dataset;  // transfer rows only
};

// Per-class fold rows plus "mean" and "pooled" aggregate rows.
std::vector<EvalRow> outcome_rows(const CvOutcome& outcome, const CellTags& tags);

}  // namespace cbd
