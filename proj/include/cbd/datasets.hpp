#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace cbd {

struct Post {
    std::string id;     // unique; replicas carry the parent id plus "#r<k>"
    std::string text;
    std::string label;
    std::string parent; // equals id for originals

    bool is_replica() const { return parent != id; }
    friend bool operator==(const Post&, const Post&) = default;
};

struct LabeledCorpus {
    std::vector<Post> posts;
    std::vector<std::string> classes; // ordered; positions define target indices
    std::string platform;

    std::size_t class_index(const std::string& label) const;
    std::size_t count_label(const std::string& label) const;
};

struct CsvSchema {
    std::string text_column = "text";
    std::string label_column = "label";
    std::string id_column; // empty → 1-based row numbers become ids

    friend bool operator==(const CsvSchema&, const CsvSchema&) = default;
};

// CSV with a header row. Every label must be in `classes`; ids must be unique.
LabeledCorpus load_corpus(const std::string& path, const CsvSchema& schema,
                          std::vector<std::string> classes, std::string platform = "");

// Writes columns id,text,label so that load_corpus round-trips the posts.
void save_corpus(const LabeledCorpus& corpus, const std::string& path);

// Each target-class post ends up `factor` times: the original in place plus
// factor-1 replicas appended after all originals, grouped by parent id.
LabeledCorpus oversample(const LabeledCorpus& corpus, const std::string& target_class,
                         std::size_t factor);

struct FoldPlan {
    std::unordered_map<std::string, std::size_t> assignment; // post id → fold
    std::size_t k = 0;
    std::uint64_t seed = 0;
    bool stratified = true;

    std::size_t fold_of(const std::string& id) const;
};

FoldPlan kfold_split(const LabeledCorpus& corpus, std::size_t k, std::uint64_t seed,
                     bool stratified = true);

// STRICT: split original posts, then oversample the training portion only —
// no parent id ever spans train and test. FIDELITY: oversample the whole
// corpus before splitting, reproducing the reference workflow in which
// replicas of one post may land on both sides.
enum class SplitMode { Strict, Fidelity };

std::string to_string(SplitMode mode);
SplitMode split_mode_from_string(const std::string& name);

struct FoldConfig {
    SplitMode mode = SplitMode::Strict;
    std::string oversample_class; // empty → no oversampling
    std::size_t oversample_factor = 1;
};

// The corpus a FoldPlan must be computed over for the given mode: the
// original corpus in strict mode, the oversampled corpus in fidelity mode.
LabeledCorpus corpus_for_mode(const LabeledCorpus& corpus, const FoldConfig& config);

struct FoldData {
    LabeledCorpus train;
    LabeledCorpus test;
};

FoldData make_fold_data(const LabeledCorpus& corpus, const FoldPlan& plan,
                        std::size_t test_fold, const FoldConfig& config);

} // namespace cbd
