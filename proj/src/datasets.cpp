#include "cbd/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "cbd/csv.hpp"
#include "cbd/rng.hpp"

namespace cbd {

std::size_t LabeledCorpus::class_index(const std::string& label) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
        if (classes[i] == label) return i;
    throw std::out_of_range("label '" + label + "' is not in the class set");
}

std::size_t LabeledCorpus::count_label(const std::string& label) const {
    std::size_t n = 0;
    for (const auto& p : posts)
        if (p.label == label) ++n;
    return n;
}

LabeledCorpus load_corpus(const std::string& path, const CsvSchema& schema,
                          std::vector<std::string> classes, std::string platform) {
    const auto table = read_csv(path);
    auto require = [&](const std::string& name) {
        auto col = table.column(name);
        if (!col) throw std::runtime_error(path + ": no column named '" + name + "'");
        return *col;
    };
    const auto text_col = require(schema.text_column);
    const auto label_col = require(schema.label_column);
    std::optional<std::size_t> id_col;
    if (!schema.id_column.empty()) id_col = require(schema.id_column);

    LabeledCorpus corpus;
    corpus.classes = std::move(classes);
    corpus.platform = std::move(platform);
    corpus.posts.reserve(table.rows.size());

    std::unordered_set<std::string> seen_ids;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto row_tag = "row " + std::to_string(r + 1);
        if (row.size() <= std::max({text_col, label_col, id_col.value_or(0)}))
            throw std::runtime_error(path + ": " + row_tag + ": too few fields");
        Post post;
        post.id = id_col ? row[*id_col] : std::to_string(r + 1);
        post.text = row[text_col];
        post.label = row[label_col];
        post.parent = post.id;
        if (std::find(corpus.classes.begin(), corpus.classes.end(), post.label) ==
            corpus.classes.end())
            throw std::runtime_error(path + ": " + row_tag + ": unknown label '" +
                                     post.label + "'");
        if (!seen_ids.insert(post.id).second)
            throw std::runtime_error(path + ": " + row_tag + ": duplicate id '" +
                                     post.id + "'");
        corpus.posts.push_back(std::move(post));
    }
    return corpus;
}

void save_corpus(const LabeledCorpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write corpus: " + path);
    write_csv_row(out, {"id", "text", "label"});
    for (const auto& p : corpus.posts) write_csv_row(out, {p.id, p.text, p.label});
    if (!out) throw std::runtime_error("short write to corpus: " + path);
}

LabeledCorpus oversample(const LabeledCorpus& corpus, const std::string& target_class,
                         std::size_t factor) {
    if (factor < 1) throw std::invalid_argument("oversampling factor must be at least 1");
    corpus.class_index(target_class); // validates the class exists
    LabeledCorpus out = corpus;
    for (const auto& p : corpus.posts) {
        if (p.label != target_class) continue;
        for (std::size_t r = 1; r < factor; ++r) {
            Post replica = p;
            replica.id = p.id + "#r" + std::to_string(r);
            replica.parent = p.id;
            out.posts.push_back(std::move(replica));
        }
    }
    return out;
}

std::size_t FoldPlan::fold_of(const std::string& id) const {
    auto it = assignment.find(id);
    if (it == assignment.end())
        throw std::runtime_error("post id '" + id + "' is missing from the fold plan");
    return it->second;
}

FoldPlan kfold_split(const LabeledCorpus& corpus, std::size_t k, std::uint64_t seed,
                     bool stratified) {
    if (k < 2) throw std::invalid_argument("k-fold split needs k >= 2");
    if (corpus.posts.size() < k)
        throw std::runtime_error("corpus of " + std::to_string(corpus.posts.size()) +
                                 " posts cannot fill k=" + std::to_string(k) + " folds");
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.stratified = stratified;

    auto assign_round_robin = [&](std::vector<const Post*>& group, Rng& rng) {
        rng.shuffle(group);
        for (std::size_t j = 0; j < group.size(); ++j)
            plan.assignment.emplace(group[j]->id, j % k);
    };

    if (!stratified) {
        std::vector<const Post*> all;
        all.reserve(corpus.posts.size());
        for (const auto& p : corpus.posts) all.push_back(&p);
        Rng rng(derive_seed(seed, "kfold"));
        assign_round_robin(all, rng);
        return plan;
    }

    for (const auto& cls : corpus.classes) {
        std::vector<const Post*> group;
        for (const auto& p : corpus.posts)
            if (p.label == cls) group.push_back(&p);
        if (group.empty()) continue;
        if (group.size() < k)
            throw std::runtime_error("class '" + cls + "' has " +
                                     std::to_string(group.size()) +
                                     " posts, fewer than k=" + std::to_string(k));
        Rng rng(derive_seed(seed, "kfold/" + cls));
        assign_round_robin(group, rng);
    }
    return plan;
}

std::string to_string(SplitMode mode) {
    return mode == SplitMode::Strict ? "strict" : "fidelity";
}

SplitMode split_mode_from_string(const std::string& name) {
    if (name == "strict") return SplitMode::Strict;
    if (name == "fidelity") return SplitMode::Fidelity;
    throw std::invalid_argument("unknown split mode '" + name +
                                "' (expected strict or fidelity)");
}

namespace {

LabeledCorpus apply_oversample(const LabeledCorpus& corpus, const FoldConfig& config) {
    if (config.oversample_class.empty() || config.oversample_factor <= 1) return corpus;
    return oversample(corpus, config.oversample_class, config.oversample_factor);
}

} // namespace

LabeledCorpus corpus_for_mode(const LabeledCorpus& corpus, const FoldConfig& config) {
    return config.mode == SplitMode::Fidelity ? apply_oversample(corpus, config) : corpus;
}

FoldData make_fold_data(const LabeledCorpus& corpus, const FoldPlan& plan,
                        std::size_t test_fold, const FoldConfig& config) {
    if (test_fold >= plan.k)
        throw std::invalid_argument("test fold " + std::to_string(test_fold) +
                                    " out of range for k=" + std::to_string(plan.k));
    const LabeledCorpus split_base = corpus_for_mode(corpus, config);

    FoldData data;
    data.train.classes = data.test.classes = corpus.classes;
    data.train.platform = data.test.platform = corpus.platform;
    for (const auto& p : split_base.posts) {
        if (plan.fold_of(p.id) == test_fold)
            data.test.posts.push_back(p);
        else
            data.train.posts.push_back(p);
    }
    if (config.mode == SplitMode::Strict) data.train = apply_oversample(data.train, config);
    return data;
}

} // namespace cbd
