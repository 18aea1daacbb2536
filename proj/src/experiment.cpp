#include "cbd/experiment.hpp"

#include <algorithm>
#include <stdexcept>

namespace cbd {

EmbeddingInit random_embedding_init() {
    return [](const Vocabulary& vocab, std::size_t dim, Rng& rng) {
        return init_random_embedding<float>(vocab, dim, rng);
    };
}

EmbeddingInit pretrained_embedding_init(std::string path) {
    return [path = std::move(path)](const Vocabulary& vocab, std::size_t dim, Rng& rng) {
        return load_pretrained_embedding<float>(path, vocab, dim, rng);
    };
}

namespace {

struct FittedText {
    Vocabulary vocab;
    std::size_t l_max = 1;
};

FittedText fit_text(const LabeledCorpus& corpus, const StopwordSet& stopwords) {
    std::vector<std::vector<std::string>> token_lists;
    std::vector<std::size_t> lengths;
    token_lists.reserve(corpus.posts.size());
    lengths.reserve(corpus.posts.size());
    for (const auto& post : corpus.posts) {
        token_lists.push_back(preprocess(post.text, stopwords));
        lengths.push_back(token_lists.back().size());
    }
    FittedText fitted;
    fitted.vocab = build_vocab(token_lists);
    fitted.l_max = compute_max_len(lengths);
    return fitted;
}

std::vector<std::size_t> argmax_rows(const std::vector<std::vector<float>>& probs) {
    std::vector<std::size_t> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i)
        out[i] = std::size_t(std::max_element(probs[i].begin(), probs[i].end()) -
                             probs[i].begin());
    return out;
}

}  // namespace

CvOutcome run_cv(const LabeledCorpus& corpus, const StopwordSet& stopwords,
                 const CvOptions& options) {
    if (options.k < 2) throw std::invalid_argument("run_cv: k must be at least 2");
    const LabeledCorpus plan_corpus = corpus_for_mode(corpus, options.fold_config);
    const std::uint64_t fold_seed =
        options.fold_seed ? *options.fold_seed : derive_seed(options.seed, "folds");
    const FoldPlan plan = kfold_split(plan_corpus, options.k, fold_seed);

    // Fidelity mode fits the text pipeline once, on everything it will train
    // on; strict mode re-fits per fold from the training split alone.
    FittedText shared;
    if (options.fold_config.mode == SplitMode::Fidelity)
        shared = fit_text(plan_corpus, stopwords);

    CvOutcome outcome;
    outcome.classes = corpus.classes;
    const std::size_t n_classes = corpus.classes.size();

    for (std::size_t fold = 0; fold < options.k; ++fold) {
        const FoldData data = make_fold_data(corpus, plan, fold, options.fold_config);
        const FittedText fitted = options.fold_config.mode == SplitMode::Fidelity
                                      ? shared
                                      : fit_text(data.train, stopwords);

        const std::uint64_t fold_seed =
            derive_seed(options.seed, "fold/" + std::to_string(fold));
        Rng embedding_rng(derive_seed(fold_seed, "embedding"));
        const EmbeddingMatrix embedding =
            options.embedding(fitted.vocab, options.dim, embedding_rng);

        ModelBundle bundle = build_model(options.arch, fitted.vocab, embedding,
                                         corpus.classes, fitted.l_max, options.hp, fold_seed);
        bundle.dataset_tag = options.dataset_tag;
        bundle.split_mode = to_string(options.fold_config.mode);
        if (options.customize) options.customize(bundle, fitted.vocab);

        const EncodedBatch train_batch =
            encode_corpus(data.train, fitted.vocab, fitted.l_max, stopwords);
        train(bundle, train_batch);

        const EncodedBatch test_batch =
            encode_corpus(data.test, fitted.vocab, fitted.l_max, stopwords);
        const auto probs = predict(bundle, test_batch);

        FoldMetrics metrics;
        metrics.fold = fold;
        metrics.counts = confusion_counts(argmax_rows(probs), test_batch.targets, n_classes);
        for (std::size_t c = 0; c < n_classes; ++c)
            metrics.per_class.push_back(precision_recall_f1(metrics.counts, c));
        outcome.folds.push_back(std::move(metrics));
    }

    for (const auto& fold : outcome.folds) add_counts(outcome.pooled_counts, fold.counts);
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::vector<Prf> fold_values;
        for (const auto& fold : outcome.folds) fold_values.push_back(fold.per_class[c]);
        outcome.mean_per_class.push_back(mean_prf(fold_values));
        outcome.pooled_per_class.push_back(precision_recall_f1(outcome.pooled_counts, c));
    }
    return outcome;
}

FullTrainResult train_full(const LabeledCorpus& corpus, const StopwordSet& stopwords,
                           const CvOptions& options) {
    LabeledCorpus training = corpus;
    if (!options.fold_config.oversample_class.empty() &&
        options.fold_config.oversample_factor > 1)
        training = oversample(corpus, options.fold_config.oversample_class,
                              options.fold_config.oversample_factor);

    const FittedText fitted = fit_text(training, stopwords);
    const std::uint64_t seed = derive_seed(options.seed, "full");
    Rng embedding_rng(derive_seed(seed, "embedding"));
    const EmbeddingMatrix embedding = options.embedding(fitted.vocab, options.dim, embedding_rng);

    FullTrainResult result;
    result.bundle = build_model(options.arch, fitted.vocab, embedding, corpus.classes,
                                fitted.l_max, options.hp, seed);
    result.bundle.dataset_tag = options.dataset_tag;
    result.bundle.split_mode = to_string(options.fold_config.mode);
    if (options.customize) options.customize(result.bundle, fitted.vocab);

    const EncodedBatch batch = encode_corpus(training, fitted.vocab, fitted.l_max, stopwords);
    result.history = train(result.bundle, batch);
    result.vocab = fitted.vocab;
    return result;
}

std::vector<EvalRow> outcome_rows(const CvOutcome& outcome, const CellTags& tags) {
    std::vector<EvalRow> rows;
    auto base_row = [&tags](const std::string& clazz) {
        EvalRow row;
        row.dataset = tags.dataset;
        row.oversampled = tags.oversampled;
        row.architecture = tags.architecture;
        row.embedding = tags.embedding;
        row.clazz = clazz;
        row.seed = tags.seed;
        row.mode = tags.mode;
        row.dim = tags.dim;
        row.approach = tags.approach;
        row.source_dataset = tags.source_dataset;
        return row;
    };
    for (std::size_t c = 0; c < outcome.classes.size(); ++c) {
        for (const auto& fold : outcome.folds) {
            EvalRow row = base_row(outcome.classes[c]);
            row.fold = std::to_string(fold.fold);
            row.precision = fold.per_class[c].precision;
            row.recall = fold.per_class[c].recall;
            row.f1 = fold.per_class[c].f1;
            rows.push_back(std::move(row));
        }
        EvalRow mean = base_row(outcome.classes[c]);
        mean.fold = "mean";
        mean.precision = outcome.mean_per_class[c].precision;
        mean.recall = outcome.mean_per_class[c].recall;
        mean.f1 = outcome.mean_per_class[c].f1;
        rows.push_back(std::move(mean));

        EvalRow pooled = base_row(outcome.classes[c]);
        pooled.fold = "pooled";
        pooled.precision = outcome.pooled_per_class[c].precision;
        pooled.recall = outcome.pooled_per_class[c].recall;
        pooled.f1 = outcome.pooled_per_class[c].f1;
        rows.push_back(std::move(pooled));
    }
    return rows;
}

}  // namespace cbd
