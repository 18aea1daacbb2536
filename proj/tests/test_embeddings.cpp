#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "cbd/embeddings.hpp"
#include "cbd/rng.hpp"
#include "cbd/text.hpp"

using namespace cbd;

namespace {

Vocabulary four_token_vocab() {
    return build_vocab({{"red", "red", "red", "green", "green", "blue", "blue", "cyan"}});
    // ranks: red=2, blue=3 (ties with green broken lexicographically), green=4, cyan=5
}

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_CASE("init_random: deterministic per seed") {
    auto vocab = four_token_vocab();
    Rng a(42), b(42);
    auto ea = init_random_embedding<float>(vocab, 8, a);
    auto eb = init_random_embedding<float>(vocab, 8, b);
    CHECK(ea.matrix.data == eb.matrix.data);
    Rng c(43);
    auto ec = init_random_embedding<float>(vocab, 8, c);
    CHECK(ea.matrix.data != ec.matrix.data);
}

TEST_CASE("init_random: PAD row is exactly zero") {
    auto vocab = four_token_vocab();
    Rng rng(1);
    auto emb = init_random_embedding<float>(vocab, 16, rng);
    for (std::size_t c = 0; c < 16; ++c) CHECK(emb.matrix.at2(0, c) == 0.0f);
}

TEST_CASE("init_random: uniform bounds and near-zero mean over 1e5 entries") {
    std::vector<std::vector<std::string>> posts;
    for (int i = 0; i < 2000; ++i) posts.push_back({"tok" + std::to_string(i)});
    auto vocab = build_vocab(posts);
    REQUIRE(vocab.size() == 2002);
    Rng rng(7);
    auto emb = init_random_embedding<double>(vocab, 50, rng);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 1; r < vocab.size(); ++r) {
        for (std::size_t c = 0; c < 50; ++c) {
            const double v = emb.matrix.at2(r, c);
            CHECK(v >= -0.05);
            CHECK(v <= 0.05);
            sum += v;
            ++n;
        }
    }
    CHECK(n >= 100000);
    CHECK(std::fabs(sum / double(n)) < 0.002);
}

TEST_CASE("load_pretrained: full coverage uses file vectors verbatim") {
    auto vocab = four_token_vocab();
    const auto path = write_temp("cbd_vec_full.txt",
                                 "red 0.5 -0.25\n"
                                 "green 1.0 2.0\n"
                                 "blue -1.5 0.75\n"
                                 "cyan 0.125 -4.0\n");
    Rng rng(3);
    auto emb = load_pretrained_embedding<float>(path, vocab, 2, rng);
    CHECK(emb.coverage == 1.0);
    CHECK(emb.matrix.at2(std::size_t(vocab.lookup("red")), 0) == 0.5f);
    CHECK(emb.matrix.at2(std::size_t(vocab.lookup("red")), 1) == -0.25f);
    CHECK(emb.matrix.at2(std::size_t(vocab.lookup("cyan")), 1) == -4.0f);
    CHECK(emb.from_file[std::size_t(vocab.lookup("blue"))] == 1);
    std::filesystem::remove(path);
}

TEST_CASE("load_pretrained: empty file behaves like random initialization") {
    auto vocab = four_token_vocab();
    const auto path = write_temp("cbd_vec_empty.txt", "");
    Rng a(11), b(11);
    auto loaded = load_pretrained_embedding<float>(path, vocab, 4, a);
    auto random = init_random_embedding<float>(vocab, 4, b);
    CHECK(loaded.coverage == 0.0);
    CHECK(loaded.matrix.data == random.matrix.data);
    std::filesystem::remove(path);
}

TEST_CASE("load_pretrained: partial coverage counts matched real tokens") {
    auto vocab = four_token_vocab();
    const auto path = write_temp("cbd_vec_half.txt",
                                 "blue 1.0 2.0 3.0\n"
                                 "martian 9.0 9.0 9.0\n"
                                 "green -0.5 0.5 0.0\n");
    Rng rng(5);
    auto emb = load_pretrained_embedding<float>(path, vocab, 3, rng);
    CHECK(emb.coverage == doctest::Approx(0.5)); // 2 of 4 real tokens
    CHECK(emb.matrix.at2(std::size_t(vocab.lookup("blue")), 2) == 3.0f);
    CHECK(emb.matrix.at2(std::size_t(vocab.lookup("green")), 0) == -0.5f);
    CHECK(emb.from_file[std::size_t(vocab.lookup("red"))] == 0);
    // unmatched rows keep the random-initialization bounds
    for (std::size_t c = 0; c < 3; ++c) {
        const float v = emb.matrix.at2(std::size_t(vocab.lookup("red")), c);
        CHECK(v >= -0.05f);
        CHECK(v <= 0.05f);
    }
    std::filesystem::remove(path);
}

TEST_CASE("load_pretrained: integer header line is tolerated") {
    auto vocab = four_token_vocab();
    const auto path = write_temp("cbd_vec_header.txt",
                                 "2 2\n"
                                 "red 0.5 0.5\n");
    Rng rng(1);
    auto emb = load_pretrained_embedding<float>(path, vocab, 2, rng);
    CHECK(emb.coverage == doctest::Approx(0.25));
    CHECK(emb.matrix.at2(std::size_t(vocab.lookup("red")), 0) == 0.5f);
    std::filesystem::remove(path);
}

TEST_CASE("load_pretrained: header dimension mismatch is fatal") {
    auto vocab = four_token_vocab();
    const auto path = write_temp("cbd_vec_hdim.txt", "100 300\nred 0.5 0.5\n");
    Rng rng(1);
    CHECK_THROWS_AS(load_pretrained_embedding<float>(path, vocab, 2, rng),
                    std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("load_pretrained: wrong field count names the line") {
    auto vocab = four_token_vocab();
    const auto path = write_temp("cbd_vec_short.txt",
                                 "red 0.5 0.5\n"
                                 "green 1.0\n");
    Rng rng(1);
    CHECK_THROWS_WITH_AS(load_pretrained_embedding<float>(path, vocab, 2, rng),
                         doctest::Contains(":2"), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("load_pretrained: unparsable number names the line") {
    auto vocab = four_token_vocab();
    const auto path = write_temp("cbd_vec_nan.txt",
                                 "red 0.5 0.5\n"
                                 "blue 0.25 zebra\n");
    Rng rng(1);
    CHECK_THROWS_WITH_AS(load_pretrained_embedding<float>(path, vocab, 2, rng),
                         doctest::Contains("zebra"), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("load_pretrained: missing file is fatal") {
    auto vocab = four_token_vocab();
    Rng rng(1);
    CHECK_THROWS_AS(load_pretrained_embedding<float>("/nonexistent/vectors.txt", vocab, 2, rng),
                    std::runtime_error);
}
