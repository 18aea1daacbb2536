#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "cbd/csv.hpp"
#include "cbd/datasets.hpp"
#include "cbd/rng.hpp"

using namespace cbd;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

LabeledCorpus toy_corpus(std::size_t bully, std::size_t none) {
    LabeledCorpus corpus;
    corpus.classes = {"none", "bully"};
    for (std::size_t i = 0; i < bully; ++i)
        corpus.posts.push_back({"b" + std::to_string(i), "insult " + std::to_string(i),
                                "bully", "b" + std::to_string(i)});
    for (std::size_t i = 0; i < none; ++i)
        corpus.posts.push_back({"n" + std::to_string(i), "hello " + std::to_string(i),
                                "none", "n" + std::to_string(i)});
    return corpus;
}

} // namespace

// ---- csv ----

TEST_CASE("csv: quoted fields keep commas, quotes, and newlines") {
    auto table = parse_csv("id,text\n"
                           "1,\"hi, there\"\n"
                           "2,\"she said \"\"no\"\"\"\n"
                           "3,\"line one\nline two\"\n");
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0][1] == "hi, there");
    CHECK(table.rows[1][1] == "she said \"no\"");
    CHECK(table.rows[2][1] == "line one\nline two");
}

TEST_CASE("csv: CRLF line endings and missing trailing newline") {
    auto table = parse_csv("a,b\r\n1,2\r\n3,4");
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[1] == std::vector<std::string>{"3", "4"});
}

TEST_CASE("csv: unterminated quote is an error") {
    CHECK_THROWS_AS(parse_csv("a\n\"oops"), std::runtime_error);
}

TEST_CASE("csv: write/parse round trip with awkward content") {
    std::ostringstream out;
    write_csv_row(out, {"id", "text"});
    write_csv_row(out, {"1", "plain"});
    write_csv_row(out, {"2", "with, comma"});
    write_csv_row(out, {"3", "with \"quotes\" and\nnewline"});
    auto table = parse_csv(out.str());
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[2][1] == "with \"quotes\" and\nnewline");
}

// ---- load_corpus ----

TEST_CASE("load_corpus: three-row fixture with declared classes") {
    const auto path = write_temp("cbd_corpus_ok.csv",
                                 "text,label\n"
                                 "you stink,bully\n"
                                 "nice day,none\n"
                                 "shut up loser,bully\n");
    auto corpus = load_corpus(path, {}, {"none", "bully"}, "fixture");
    CHECK(corpus.posts.size() == 3);
    CHECK(corpus.classes == std::vector<std::string>{"none", "bully"});
    CHECK(corpus.posts[0].id == "1"); // synthesized row-number ids
    CHECK(corpus.posts[2].id == "3");
    CHECK(corpus.posts[2].label == "bully");
    CHECK(corpus.count_label("bully") == 2);
    std::filesystem::remove(path);
}

TEST_CASE("load_corpus: explicit id column is honored") {
    const auto path = write_temp("cbd_corpus_ids.csv",
                                 "post_id,text,label\n"
                                 "p9,hello,none\n");
    CsvSchema schema;
    schema.id_column = "post_id";
    auto corpus = load_corpus(path, schema, {"none", "bully"});
    CHECK(corpus.posts[0].id == "p9");
    CHECK(corpus.posts[0].parent == "p9");
    std::filesystem::remove(path);
}

TEST_CASE("load_corpus: unknown label names the row") {
    const auto path = write_temp("cbd_corpus_badlabel.csv",
                                 "text,label\n"
                                 "fine,none\n"
                                 "oops,bullyy\n");
    CHECK_THROWS_WITH_AS(load_corpus(path, {}, {"none", "bully"}),
                         doctest::Contains("row 2"), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("load_corpus: missing mapped column is fatal") {
    const auto path = write_temp("cbd_corpus_nocol.csv", "body,label\nhey,none\n");
    CHECK_THROWS_WITH_AS(load_corpus(path, {}, {"none"}), doctest::Contains("text"),
                         std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("load_corpus: duplicate ids are fatal") {
    const auto path = write_temp("cbd_corpus_dup.csv",
                                 "post_id,text,label\n"
                                 "x,one,none\n"
                                 "x,two,none\n");
    CsvSchema schema;
    schema.id_column = "post_id";
    CHECK_THROWS_WITH_AS(load_corpus(path, schema, {"none"}),
                         doctest::Contains("duplicate"), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("load_corpus: save/load round trip preserves posts") {
    auto corpus = toy_corpus(3, 4);
    corpus.posts[1].text = "tricky, \"quoted\"\ntext";
    const auto path = (std::filesystem::temp_directory_path() / "cbd_roundtrip.csv").string();
    save_corpus(corpus, path);
    CsvSchema schema;
    schema.id_column = "id";
    auto loaded = load_corpus(path, schema, corpus.classes, corpus.platform);
    CHECK(loaded.posts == corpus.posts);
    std::filesystem::remove(path);
}

// ---- oversample ----

TEST_CASE("oversample: factor one is the identity") {
    auto corpus = toy_corpus(2, 3);
    auto out = oversample(corpus, "bully", 1);
    CHECK(out.posts == corpus.posts);
}

TEST_CASE("oversample: tripling two bullies among five none") {
    auto corpus = toy_corpus(2, 5);
    auto out = oversample(corpus, "bully", 3);
    CHECK(out.count_label("bully") == 6);
    CHECK(out.count_label("none") == 5);
    REQUIRE(out.posts.size() == 11);
    // originals first, then replicas grouped by parent
    for (std::size_t i = 0; i < 7; ++i) CHECK_FALSE(out.posts[i].is_replica());
    CHECK(out.posts[7].id == "b0#r1");
    CHECK(out.posts[8].id == "b0#r2");
    CHECK(out.posts[9].id == "b1#r1");
    CHECK(out.posts[10].id == "b1#r2");
    CHECK(out.posts[7].parent == "b0");
    CHECK(out.posts[7].text == out.posts[0].text);
}

TEST_CASE("oversample: class counts scale exactly and others stay put") {
    Rng rng(19);
    for (int trial = 0; trial < 30; ++trial) {
        const auto bully = 1 + rng.index(20);
        const auto none = 1 + rng.index(20);
        const auto factor = 1 + rng.index(5);
        auto out = oversample(toy_corpus(bully, none), "bully", factor);
        CHECK(out.count_label("bully") == bully * factor);
        CHECK(out.count_label("none") == none);
    }
}

TEST_CASE("oversample: bad arguments are errors") {
    auto corpus = toy_corpus(1, 1);
    CHECK_THROWS_AS(oversample(corpus, "bully", 0), std::invalid_argument);
    CHECK_THROWS_AS(oversample(corpus, "ghost", 2), std::out_of_range);
}

// ---- kfold_split ----

TEST_CASE("kfold: ten posts over five folds gives folds of two") {
    auto corpus = toy_corpus(0, 10);
    corpus.classes = {"none"};
    auto plan = kfold_split(corpus, 5, 123);
    std::vector<std::size_t> sizes(5, 0);
    for (const auto& [id, fold] : plan.assignment) ++sizes[fold];
    for (auto s : sizes) CHECK(s == 2);
}

TEST_CASE("kfold: stratified balance within one per class") {
    auto corpus = toy_corpus(7, 13);
    auto plan = kfold_split(corpus, 5, 99);
    std::vector<std::size_t> bully(5, 0), none(5, 0);
    for (const auto& p : corpus.posts) {
        auto f = plan.fold_of(p.id);
        (p.label == "bully" ? bully : none)[f] += 1;
    }
    for (auto b : bully) {
        CHECK(b >= 1);
        CHECK(b <= 2);
    }
    for (auto n : none) {
        CHECK(n >= 2);
        CHECK(n <= 3);
    }
}

TEST_CASE("kfold: deterministic per seed") {
    auto corpus = toy_corpus(10, 10);
    auto a = kfold_split(corpus, 5, 7);
    auto b = kfold_split(corpus, 5, 7);
    CHECK(a.assignment == b.assignment);
    auto c = kfold_split(corpus, 5, 8);
    CHECK(a.assignment != c.assignment);
}

TEST_CASE("kfold: class smaller than k is fatal in stratified mode") {
    auto corpus = toy_corpus(3, 10);
    CHECK_THROWS_WITH_AS(kfold_split(corpus, 5, 1), doctest::Contains("bully"),
                         std::runtime_error);
}

TEST_CASE("kfold: k below two is a configuration error") {
    CHECK_THROWS_AS(kfold_split(toy_corpus(5, 5), 1, 0), std::invalid_argument);
}

TEST_CASE("kfold: folds partition the ids across a 100-seed sweep") {
    auto corpus = toy_corpus(9, 14);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto plan = kfold_split(corpus, 5, seed);
        CHECK(plan.assignment.size() == corpus.posts.size());
        for (const auto& p : corpus.posts) {
            auto f = plan.fold_of(p.id); // throws if missing
            CHECK(f < 5);
        }
    }
}

// ---- make_fold_data ----

TEST_CASE("strict mode: train and test parent ids never intersect") {
    auto corpus = toy_corpus(8, 12);
    FoldConfig config;
    config.oversample_class = "bully";
    config.oversample_factor = 3;
    auto plan = kfold_split(corpus_for_mode(corpus, config), 4, 5);
    for (std::size_t fold = 0; fold < 4; ++fold) {
        auto data = make_fold_data(corpus, plan, fold, config);
        std::set<std::string> test_parents;
        for (const auto& p : data.test.posts) test_parents.insert(p.parent);
        for (const auto& p : data.train.posts) CHECK(test_parents.count(p.parent) == 0);
        for (const auto& p : data.test.posts) CHECK_FALSE(p.is_replica());
    }
}

TEST_CASE("strict mode: tripled 825-positive corpus splits 165 / 1980") {
    auto corpus = toy_corpus(825, 1000);
    FoldConfig config;
    config.oversample_class = "bully";
    config.oversample_factor = 3;
    auto plan = kfold_split(corpus, 5, 42);
    auto data = make_fold_data(corpus, plan, 0, config);
    CHECK(data.test.count_label("bully") == 165);
    CHECK(data.train.count_label("bully") == 1980); // 660 originals × 3
    CHECK(data.test.count_label("none") == 200);
    CHECK(data.train.count_label("none") == 800);
}

TEST_CASE("fidelity mode: replicas of one parent can span train and test") {
    LabeledCorpus corpus = toy_corpus(3, 2);
    FoldConfig config;
    config.mode = SplitMode::Fidelity;
    config.oversample_class = "bully";
    config.oversample_factor = 3;
    auto oversampled = corpus_for_mode(corpus, config);
    CHECK(oversampled.posts.size() == 11);
    auto plan = kfold_split(oversampled, 2, 31);
    auto data = make_fold_data(corpus, plan, 0, config);
    CHECK(data.train.posts.size() + data.test.posts.size() == 11);
    std::set<std::string> train_parents, test_parents;
    for (const auto& p : data.train.posts)
        if (p.label == "bully") train_parents.insert(p.parent);
    for (const auto& p : data.test.posts)
        if (p.label == "bully") test_parents.insert(p.parent);
    bool leaked = false;
    for (const auto& parent : train_parents) leaked = leaked || test_parents.count(parent);
    CHECK(leaked); // the documented leakage, demonstrated on a toy corpus
}

TEST_CASE("make_fold_data: test fold out of range is an error") {
    auto corpus = toy_corpus(4, 4);
    auto plan = kfold_split(corpus, 2, 3);
    CHECK_THROWS_AS(make_fold_data(corpus, plan, 2, {}), std::invalid_argument);
}

TEST_CASE("make_fold_data: corpus/plan mismatch is detected") {
    auto corpus = toy_corpus(4, 4);
    auto plan = kfold_split(corpus, 2, 3);
    corpus.posts.push_back({"extra", "text", "none", "extra"});
    CHECK_THROWS_WITH_AS(make_fold_data(corpus, plan, 0, {}), doctest::Contains("extra"),
                         std::runtime_error);
}

TEST_CASE("split mode names round trip") {
    CHECK(to_string(SplitMode::Strict) == "strict");
    CHECK(split_mode_from_string("fidelity") == SplitMode::Fidelity);
    CHECK_THROWS_AS(split_mode_from_string("loose"), std::invalid_argument);
}
