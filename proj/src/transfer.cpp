#include "cbd/transfer.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <stdexcept>

namespace cbd {

namespace {

std::optional<std::size_t> index_of(const std::vector<std::string>& classes,
                                    const std::string& name) {
    const auto it = std::find(classes.begin(), classes.end(), name);
    if (it == classes.end()) return std::nullopt;
    return std::size_t(it - classes.begin());
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += ", ";
        out += p;
    }
    return out;
}

}  // namespace

std::vector<std::size_t> class_mapping(const std::vector<std::string>& source_classes,
                                       const std::vector<std::string>& target_classes) {
    std::vector<std::size_t> mapping;
    mapping.reserve(source_classes.size());
    for (const auto& source_class : source_classes) {
        if (auto direct = index_of(target_classes, source_class)) {
            mapping.push_back(*direct);
            continue;
        }
        // Fold the leftover class into the positive side of a binary target.
        const auto target_none = index_of(target_classes, "none");
        if (target_classes.size() != 2 || !target_none ||
            !index_of(source_classes, "none"))
            throw std::invalid_argument("cannot reconcile source class '" + source_class +
                                        "' with target classes [" + join(target_classes) + "]");
        mapping.push_back(1 - *target_none);
    }
    return mapping;
}

VocabMergeReport copy_shared_embedding_rows(ModelBundle& target, const Vocabulary& target_vocab,
                                            const ModelBundle& source,
                                            const Vocabulary& source_vocab) {
    if (target.embedding_dim != source.embedding_dim)
        throw std::invalid_argument(
            "embedding transfer: dimension mismatch, source " +
            std::to_string(source.embedding_dim) + " vs target " +
            std::to_string(target.embedding_dim));
    auto& dst = target.params.at("embedding.E").value;
    const auto& src = source.params.at("embedding.E").value;
    const std::size_t d = target.embedding_dim;

    VocabMergeReport report;
    for (std::size_t row = 2; row < target_vocab.size(); ++row) {
        const std::int32_t source_row = source_vocab.lookup(target_vocab.tokens[row]);
        if (source_row == Vocabulary::kUnk) {
            ++report.target_only;
            continue;
        }
        for (std::size_t j = 0; j < d; ++j)
            dst.data[row * d + j] = src.data[std::size_t(source_row) * d + j];
        ++report.shared;
    }
    return report;
}

bool copy_non_embedding_params(ModelBundle& target, const ModelBundle& source) {
    const bool copy_dense = target.classes.size() == source.classes.size();
    for (auto& param : target.params) {
        if (param.name == "embedding.E") continue;
        const bool is_dense = param.name.rfind("dense.", 0) == 0;
        if (is_dense && !copy_dense) continue;
        const auto* from = source.params.find(param.name);
        if (from == nullptr)
            throw std::invalid_argument("model transfer: source has no tensor '" + param.name +
                                        "' (architecture mismatch)");
        if (from->value.shape != param.value.shape)
            throw std::invalid_argument("model transfer: shape mismatch for '" + param.name +
                                        "': source " + shape_str(from->value.shape) +
                                        " vs target " + shape_str(param.value.shape));
        param.value.data = from->value.data;
    }
    return copy_dense;
}

TransferResult transfer_complete(const ModelBundle& source, const Vocabulary& source_vocab,
                                 const LabeledCorpus& target, const StopwordSet& stopwords,
                                 const TransferTags& tags) {
    const auto mapping = class_mapping(source.classes, target.classes);
    ModelBundle frozen = source;  // the caller's bundle is never touched
    const EncodedBatch batch = encode_corpus(target, source_vocab, source.l_max, stopwords);
    const auto source_probs = predict(frozen, batch);

    const std::size_t n_target = target.classes.size();
    std::vector<std::size_t> predictions(source_probs.size());
    for (std::size_t i = 0; i < source_probs.size(); ++i) {
        std::vector<float> folded(n_target, 0.0f);
        for (std::size_t s = 0; s < mapping.size(); ++s) folded[mapping[s]] += source_probs[i][s];
        predictions[i] = std::size_t(std::max_element(folded.begin(), folded.end()) -
                                     folded.begin());
    }
    const ConfusionMatrix counts = confusion_counts(predictions, batch.targets, n_target);

    TransferResult result;
    for (std::size_t c = 0; c < n_target; ++c) {
        const Prf prf = precision_recall_f1(counts, c);
        EvalRow row;
        row.dataset = tags.target_dataset;
        row.oversampled = false;  // no target-side training at all
        row.architecture = to_string(source.arch);
        row.embedding = tags.embedding;
        row.clazz = target.classes[c];
        row.fold = "mean";
        row.precision = prf.precision;
        row.recall = prf.recall;
        row.f1 = prf.f1;
        row.seed = tags.seed;
        row.mode = tags.mode;
        row.dim = source.embedding_dim;
        row.approach = "complete";
        row.source_dataset = tags.source_dataset;
        result.rows.push_back(std::move(row));
    }
    return result;
}

namespace {

TransferResult run_transfer_cv(const ModelBundle& source, const Vocabulary& source_vocab,
                               const LabeledCorpus& target, const StopwordSet& stopwords,
                               const CvOptions& options, const TransferTags& tags,
                               const std::string& approach, bool copy_weights) {
    if (source.embedding_dim != options.dim)
        throw std::invalid_argument(approach + " transfer: source embedding dimension " +
                                    std::to_string(source.embedding_dim) +
                                    " does not match target dimension " +
                                    std::to_string(options.dim));
    if (copy_weights && source.arch != options.arch)
        throw std::invalid_argument("model transfer: source architecture " +
                                    to_string(source.arch) + " does not match target " +
                                    to_string(options.arch));

    CvOptions opt = options;
    opt.dataset_tag = tags.target_dataset;
    auto merges = std::make_shared<std::vector<VocabMergeReport>>();
    opt.customize = [&source, &source_vocab, merges, copy_weights,
                     inner = options.customize](ModelBundle& bundle, const Vocabulary& vocab) {
        merges->push_back(copy_shared_embedding_rows(bundle, vocab, source, source_vocab));
        if (copy_weights) copy_non_embedding_params(bundle, source);
        if (inner) inner(bundle, vocab);
    };

    TransferResult result;
    result.cv = run_cv(target, stopwords, opt);
    result.merges = std::move(*merges);

    CellTags cell;
    cell.dataset = tags.target_dataset;
    cell.oversampled = !options.fold_config.oversample_class.empty() &&
                       options.fold_config.oversample_factor > 1;
    cell.architecture = to_string(options.arch);
    cell.embedding = tags.embedding;
    cell.dim = options.dim;
    cell.seed = options.seed;
    cell.mode = to_string(options.fold_config.mode);
    cell.approach = approach;
    cell.source_dataset = tags.source_dataset;
    result.rows = outcome_rows(result.cv, cell);
    return result;
}

}  // namespace

TransferResult transfer_feature_level(const ModelBundle& source, const Vocabulary& source_vocab,
                                      const LabeledCorpus& target, const StopwordSet& stopwords,
                                      const CvOptions& options, const TransferTags& tags) {
    return run_transfer_cv(source, source_vocab, target, stopwords, options, tags, "feature",
                           false);
}

TransferResult transfer_model_level(const ModelBundle& source, const Vocabulary& source_vocab,
                                    const LabeledCorpus& target, const StopwordSet& stopwords,
                                    const CvOptions& options, const TransferTags& tags) {
    return run_transfer_cv(source, source_vocab, target, stopwords, options, tags, "model", true);
}

}  // namespace cbd
