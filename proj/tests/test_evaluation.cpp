#include "doctest.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "cbd/evaluation.hpp"
#include "cbd/rng.hpp"

using namespace cbd;

namespace {

// Independent enumeration oracle: recursive combination generation instead of
// the library's bitmask walk, sharing no code with the implementation.
double oracle_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pool(a);
    pool.insert(pool.end(), b.begin(), b.end());
    const int total = int(pool.size());
    const int m = int(a.size());
    const double mn = double(a.size()) * double(b.size());

    auto ustat = [](const std::vector<double>& xs, const std::vector<double>& ys) {
        double u = 0.0;
        for (double x : xs)
            for (double y : ys) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
        return u;
    };
    const double u_obs = ustat(a, b);
    const double lo = std::min(u_obs, mn - u_obs);
    const double hi = mn - lo;

    long assignments = 0;
    long tail = 0;
    std::vector<int> pick(static_cast<std::size_t>(m));
    std::function<void(int, int)> recurse = [&](int start, int chosen) {
        if (chosen == m) {
            std::vector<double> ga, gb;
            std::size_t next = 0;
            for (int i = 0; i < total; ++i) {
                if (next < pick.size() && pick[next] == i) {
                    ga.push_back(pool[std::size_t(i)]);
                    ++next;
                } else {
                    gb.push_back(pool[std::size_t(i)]);
                }
            }
            const double u = ustat(ga, gb);
            ++assignments;
            if (u <= lo + 1e-9 || u >= hi - 1e-9) ++tail;
            return;
        }
        for (int i = start; i < total; ++i) {
            pick[std::size_t(chosen)] = i;
            recurse(i + 1, chosen + 1);
        }
    };
    recurse(0, 0);
    return double(tail) / double(assignments);
}

EvalRow mean_row(std::string dataset, bool oversampled, std::string arch, std::string embedding,
                 std::string clazz, double p, double r, double f1) {
    EvalRow row;
    row.dataset = std::move(dataset);
    row.oversampled = oversampled;
    row.architecture = std::move(arch);
    row.embedding = std::move(embedding);
    row.clazz = std::move(clazz);
    row.fold = "mean";
    row.precision = p;
    row.recall = r;
    row.f1 = f1;
    row.seed = 1;
    row.mode = "strict";
    row.dim = 50;
    return row;
}

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("confusion_counts: perfect predictions give a diagonal matrix") {
    const std::vector<std::size_t> labels = {0, 1, 1, 2, 0, 2, 2};
    auto counts = confusion_counts(labels, labels, 3);
    CHECK(counts[0][0] == 2);
    CHECK(counts[1][1] == 2);
    CHECK(counts[2][2] == 3);
    std::size_t off_diagonal = 0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) off_diagonal += counts[i][j];
    CHECK(off_diagonal == 0);
}

TEST_CASE("confusion_counts: six-post hand tally") {
    const std::vector<std::size_t> predictions = {0, 1, 2, 1, 0, 2};
    const std::vector<std::size_t> labels = {0, 1, 1, 2, 2, 0};
    auto counts = confusion_counts(predictions, labels, 3);
    const ConfusionMatrix expected = {{1, 0, 1}, {0, 1, 1}, {1, 1, 0}};
    CHECK(counts == expected);
    std::size_t total = 0;
    for (const auto& row : counts)
        for (std::size_t c : row) total += c;
    CHECK(total == 6);
}

TEST_CASE("confusion_counts: empty input gives a zero matrix") {
    auto counts = confusion_counts({}, {}, 4);
    REQUIRE(counts.size() == 4);
    for (const auto& row : counts)
        for (std::size_t c : row) CHECK(c == 0);
}

TEST_CASE("confusion_counts: length mismatch and out-of-range indices are fatal") {
    CHECK_THROWS_AS(confusion_counts({0, 1}, {0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(confusion_counts({0, 2}, {0, 1}, 2), std::invalid_argument);
    CHECK_THROWS_AS(confusion_counts({0, 1}, {0, 5}, 2), std::invalid_argument);
}

TEST_CASE("add_counts pools fold matrices element-wise") {
    ConfusionMatrix pooled;
    add_counts(pooled, {{1, 2}, {3, 4}});
    add_counts(pooled, {{10, 0}, {0, 10}});
    const ConfusionMatrix expected = {{11, 2}, {3, 14}};
    CHECK(pooled == expected);
    CHECK_THROWS_AS(add_counts(pooled, ConfusionMatrix{{1}}), std::invalid_argument);
}

TEST_CASE("precision_recall_f1: perfect classifier scores 1/1/1") {
    ConfusionMatrix counts = {{5, 0}, {0, 10}};
    auto prf = precision_recall_f1(counts, 1);
    CHECK(prf.precision == 1.0);
    CHECK(prf.recall == 1.0);
    CHECK(prf.f1 == 1.0);
}

TEST_CASE("precision_recall_f1: TP=3 FP=1 FN=2 hand values") {
    // class 1 is the target: counts[1][1]=TP, counts[0][1]=FP, counts[1][0]=FN
    ConfusionMatrix counts = {{7, 1}, {2, 3}};
    auto prf = precision_recall_f1(counts, 1);
    CHECK(prf.precision == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(prf.recall == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(prf.f1 == doctest::Approx(0.6667).epsilon(1e-4));
}

TEST_CASE("precision_recall_f1: zero denominators yield zero, not NaN") {
    ConfusionMatrix counts = {{4, 0}, {0, 0}};
    auto prf = precision_recall_f1(counts, 1);
    CHECK(prf.precision == 0.0);
    CHECK(prf.recall == 0.0);
    CHECK(prf.f1 == 0.0);
    CHECK_THROWS_AS(precision_recall_f1(counts, 2), std::invalid_argument);
}

TEST_CASE("f1_score: published precision/recall pair rounds to the published F1") {
    const double f1 = f1_score(0.91, 0.98);
    CHECK(f1 == doctest::Approx(2.0 * 0.91 * 0.98 / 1.89).epsilon(1e-15));
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", f1);
    CHECK(std::string(buf) == "0.94");
}

TEST_CASE("precision_recall_f1 matches a brute-force per-post tally on random cases") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t classes = 2 + rng.index(4);
        const std::size_t n = rng.index(40);
        std::vector<std::size_t> preds(n), labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            preds[i] = rng.index(classes);
            labels[i] = rng.index(classes);
        }
        const std::size_t target = rng.index(classes);
        auto prf = precision_recall_f1(confusion_counts(preds, labels, classes), target);

        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (preds[i] == target && labels[i] == target) ++tp;
            if (preds[i] == target && labels[i] != target) ++fp;
            if (preds[i] != target && labels[i] == target) ++fn;
        }
        const double p = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
        const double r = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
        const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        REQUIRE(prf.precision == p);
        REQUIRE(prf.recall == r);
        REQUIRE(prf.f1 == f);
    }
}

TEST_CASE("f1_score is symmetric and between min and max of its inputs") {
    Rng rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        const double p = rng.next_double();
        const double r = rng.next_double();
        const double f = f1_score(p, r);
        CHECK(f == f1_score(r, p));
        if (p + r > 0) {
            CHECK(f >= std::min(p, r) - 1e-15);
            CHECK(f <= std::max(p, r) + 1e-15);
        }
    }
}

TEST_CASE("mean_prf averages fold metrics arithmetically") {
    auto mean = mean_prf({{0.5, 0.7, 0.58}, {0.7, 0.9, 0.78}});
    CHECK(mean.precision == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(mean.recall == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(mean.f1 == doctest::Approx(0.68).epsilon(1e-12));
    CHECK_THROWS_AS(mean_prf({}), std::invalid_argument);
}

TEST_CASE("mann_whitney_u: fully separated samples give U=0 and p=2/20") {
    auto result = mann_whitney_u({1, 2, 3}, {4, 5, 6});
    CHECK(result.u == 0.0);
    CHECK(result.p == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(result.exact);
}

TEST_CASE("mann_whitney_u: identical multisets give the midpoint U and p=1") {
    const std::vector<double> sample = {0.5, 0.7, 0.9};
    auto result = mann_whitney_u(sample, sample);
    CHECK(result.u == doctest::Approx(4.5).epsilon(1e-12));  // n^2/2
    CHECK(result.p >= 0.99);
}

TEST_CASE("mann_whitney_statistic: hand-counted pair comparisons") {
    CHECK(mann_whitney_statistic({3, 5}, {1, 2, 4}) == doctest::Approx(5.0));
    CHECK(mann_whitney_statistic({1, 2}, {2, 3}) == doctest::Approx(0.5));  // one tie
    CHECK(mann_whitney_statistic({1, 1}, {2, 2}) == doctest::Approx(0.0));
}

TEST_CASE("mann_whitney_u: exact branch handles ties by enumeration") {
    // pooled {1,1,2,2}: only 1 of C(4,2)=6 assignments reaches U=0 on each side
    const double p = mann_whitney_exact_p({1, 1}, {2, 2});
    CHECK(p == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
    // a == b up to swap: U sits at the midpoint, everything is in the tail
    CHECK(mann_whitney_exact_p({1, 2}, {1, 2}) == doctest::Approx(1.0));
}

TEST_CASE("mann_whitney_u: enumerated two-sided p-values for reference cases") {
    auto p_of = [](std::vector<double> a, std::vector<double> b) {
        return mann_whitney_u(a, b).p;
    };
    CHECK(p_of({1, 3, 5, 7}, {2, 4, 6, 8}) == doctest::Approx(24.0 / 35.0).epsilon(1e-12));
    CHECK(p_of({1, 2, 4, 8}, {3, 5, 6, 7, 9, 10, 11}) == doctest::Approx(36.0 / 330.0).epsilon(1e-12));
    CHECK(p_of({2, 9}, {1, 3, 4, 5, 6, 7, 8}) == doctest::Approx(32.0 / 36.0).epsilon(1e-12));
}

TEST_CASE("mann_whitney_u: exact up to 12 pooled values, approximate past it") {
    std::vector<double> a, b;
    for (int i = 0; i < 6; ++i) a.push_back(i * 2.0);
    for (int i = 0; i < 6; ++i) b.push_back(i * 2.0 + 1.0);
    CHECK(mann_whitney_u(a, b).exact);
    b.push_back(99.0);
    CHECK_FALSE(mann_whitney_u(a, b).exact);
}

TEST_CASE("mann_whitney_u agrees with an independent enumeration on random samples") {
    Rng rng(5150);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t m = 1 + rng.index(5);
        const std::size_t n = 1 + rng.index(5);
        std::vector<double> a, b;
        // small integer values so ties happen often
        for (std::size_t i = 0; i < m; ++i) a.push_back(double(rng.index(5)));
        for (std::size_t i = 0; i < n; ++i) b.push_back(double(rng.index(5)));
        auto result = mann_whitney_u(a, b);
        REQUIRE(result.exact);
        REQUIRE(result.p == doctest::Approx(oracle_exact_p(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("mann_whitney approximation stays within 0.01 of enumeration at small sizes") {
    // Exhaustive over every tie-free configuration with at most 12 pooled
    // values: each subset of ranks realizes one achievable U value.
    double worst = 0.0;
    for (int m = 1; m + 1 <= 12; ++m) {
        for (int n = 1; m + n <= 12; ++n) {
            const int total = m + n;
            for (std::uint32_t mask = 0; mask < (1u << total); ++mask) {
                if (std::popcount(mask) != m) continue;
                std::vector<double> a, b;
                for (int i = 0; i < total; ++i)
                    (mask & (1u << i) ? a : b).push_back(double(i + 1));
                const double gap =
                    std::fabs(mann_whitney_approx_p(a, b) - mann_whitney_exact_p(a, b));
                worst = std::max(worst, gap);
            }
        }
    }
    CHECK(worst <= 0.01);
}

TEST_CASE("mann_whitney_u: separated normal-ish samples are significant at n=20 vs 20") {
    Rng rng(123);
    auto gauss = [&rng](double mu) {
        const double u1 = rng.next_double();
        const double u2 = rng.next_double();
        return mu + std::sqrt(-2.0 * std::log(u1 + 1e-300)) * std::cos(6.283185307179586 * u2);
    };
    std::vector<double> a, b;
    for (int i = 0; i < 20; ++i) {
        a.push_back(gauss(0.0));
        b.push_back(gauss(0.8));
    }
    auto result = mann_whitney_u(a, b);
    CHECK_FALSE(result.exact);
    CHECK(result.p < 0.01);

    // the approximation tracks enumeration on subsamples of the same data
    for (int trial = 0; trial < 40; ++trial) {
        auto ca = a, cb = b;
        rng.shuffle(ca);
        rng.shuffle(cb);
        const std::vector<double> sa(ca.begin(), ca.begin() + 6);
        const std::vector<double> sb(cb.begin(), cb.begin() + 6);
        CHECK(std::fabs(mann_whitney_approx_p(sa, sb) - mann_whitney_exact_p(sa, sb)) <= 0.01);
    }
}

TEST_CASE("mann_whitney_u: empty samples are rejected and p stays in [0,1]") {
    CHECK_THROWS_AS(mann_whitney_u({}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(mann_whitney_u({1.0}, {}), std::invalid_argument);
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + rng.index(10);
        const std::size_t n = 1 + rng.index(10);
        std::vector<double> a, b;
        for (std::size_t i = 0; i < m; ++i) a.push_back(rng.uniform(-1.0, 1.0));
        for (std::size_t i = 0; i < n; ++i) b.push_back(rng.uniform(-1.0, 1.0));
        auto result = mann_whitney_u(a, b);
        CHECK(result.p >= 0.0);
        CHECK(result.p <= 1.0);
        // U of the swapped test mirrors around m*n
        CHECK(mann_whitney_statistic(b, a) == doctest::Approx(double(m * n) - result.u));
        CHECK(mann_whitney_u(b, a).p == doctest::Approx(result.p).epsilon(1e-12));
    }
}

TEST_CASE("results csv: header lists the full column schema in order") {
    CHECK(results_csv_header() ==
          "dataset,oversampled,architecture,embedding,class,fold,precision,recall,f1,seed,mode,"
          "dim,approach,source_dataset");
}

TEST_CASE("results csv: write/read round trip preserves doubles exactly") {
    std::vector<EvalRow> rows;
    EvalRow row;
    row.dataset = "youtube";
    row.oversampled = true;
    row.architecture = "BLSTM_ATTN";
    row.embedding = "sswe";
    row.clazz = "bully";
    row.fold = "3";
    row.precision = 1.0 / 3.0;
    row.recall = 0.1;
    row.f1 = std::nextafter(0.94, 1.0);
    row.seed = 0xdeadbeefcafe1234ull;
    row.mode = "strict";
    row.dim = 200;
    rows.push_back(row);

    row.dataset = "data, with comma";  // exercises CSV quoting
    row.fold = "mean";
    row.precision = 1e-17;
    row.approach = "feature";
    row.source_dataset = "twitter";
    rows.push_back(row);

    const auto path = temp_path("cbd_results_roundtrip.csv");
    write_results_csv(path, rows);
    auto back = read_results_csv(path);
    REQUIRE(back.size() == rows.size());
    CHECK(back == rows);
    std::filesystem::remove(path);
}

TEST_CASE("results csv: missing column and malformed values are fatal") {
    const auto path = temp_path("cbd_results_bad.csv");
    {
        std::ofstream out(path);
        out << "dataset,oversampled\nx,true\n";
    }
    CHECK_THROWS_AS(read_results_csv(path), std::runtime_error);
    {
        std::ofstream out(path);
        out << results_csv_header() << "\n";
        out << "d,maybe,CNN,random,bully,0,0.5,0.5,0.5,1,strict,50,,\n";
    }
    CHECK_THROWS_AS(read_results_csv(path), std::runtime_error);
    {
        std::ofstream out(path);
        out << results_csv_header() << "\n";
        out << "d,true,CNN,random,bully,0,not-a-number,0.5,0.5,1,strict,50,,\n";
    }
    CHECK_THROWS_AS(read_results_csv(path), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("table layout names round trip and reject unknowns") {
    for (const char* name : {"table1a", "table2a", "table3a", "table4", "table5", "table6"})
        CHECK(to_string(table_layout_from_string(name)) == name);
    CHECK_THROWS_AS(table_layout_from_string("table9"), std::invalid_argument);
}

TEST_CASE("render_table: single cell renders at two decimals") {
    const std::vector<EvalRow> rows = {
        mean_row("F", true, "BLSTM_ATTN", "random", "bully", 0.91, 0.98, 0.9436)};
    const std::string expected =
        "| Dataset | Class | Precision (Random) | Recall (Random) | F1 (Random) |\n"
        "| --- | --- | --- | --- | --- |\n"
        "| F+ | bully | 0.91 | 0.98 | 0.94 |\n";
    CHECK(render_table(rows, TableLayout::Table1a) == expected);
    // the same rows render identically under the single-dataset layout
    CHECK(render_table(rows, TableLayout::Table4) == expected);
}

TEST_CASE("render_table: missing cells render as an em dash") {
    const std::vector<EvalRow> rows = {
        mean_row("F", false, "BLSTM_ATTN", "random", "bully", 0.37, 0.34, 0.35),
        mean_row("W", false, "BLSTM_ATTN", "sswe", "attack", 0.81, 0.65, 0.72)};
    const std::string table = render_table(rows, TableLayout::Table1a);
    CHECK(table.find("| F | bully | 0.37 | — | 0.34 | — | 0.35 | — |") != std::string::npos);
    CHECK(table.find("| W | attack | — | 0.81 | — | 0.65 | — | 0.72 |") != std::string::npos);
}

TEST_CASE("render_table: rows sort by dataset, original before oversampled, then class") {
    std::vector<EvalRow> rows = {
        mean_row("W", true, "BLSTM_ATTN", "random", "attack", 0.94, 0.99, 0.96),
        mean_row("T", false, "BLSTM_ATTN", "random", "sexism", 0.73, 0.71, 0.72),
        mean_row("T", false, "BLSTM_ATTN", "random", "racism", 0.81, 0.71, 0.76),
        mean_row("F", true, "BLSTM_ATTN", "random", "bully", 0.91, 0.98, 0.94),
        mean_row("F", false, "BLSTM_ATTN", "random", "bully", 0.37, 0.34, 0.35),
    };
    const std::string table = render_table(rows, TableLayout::Table1a);
    const auto pos = [&table](const char* needle) {
        auto at = table.find(needle);
        REQUIRE(at != std::string::npos);
        return at;
    };
    CHECK(pos("| F | bully") < pos("| F+ | bully"));
    CHECK(pos("| F+ | bully") < pos("| T | racism"));
    CHECK(pos("| T | racism") < pos("| T | sexism"));
    CHECK(pos("| T | sexism") < pos("| W+ | attack"));
}

TEST_CASE("render_table: embedding columns follow the fixed ordering") {
    std::vector<EvalRow> rows = {
        mean_row("F", true, "BLSTM_ATTN", "sswe", "bully", 0.86, 0.92, 0.89),
        mean_row("F", true, "BLSTM_ATTN", "glove", "bully", 0.88, 0.95, 0.91),
        mean_row("F", true, "BLSTM_ATTN", "random", "bully", 0.91, 0.98, 0.94),
    };
    const std::string table = render_table(rows, TableLayout::Table1a);
    const auto random = table.find("(Random)");
    const auto glove = table.find("(GloVe)");
    const auto sswe = table.find("(SSWE)");
    REQUIRE(random != std::string::npos);
    REQUIRE(glove != std::string::npos);
    REQUIRE(sswe != std::string::npos);
    CHECK(random < glove);
    CHECK(glove < sswe);
    CHECK(table.find("| F+ | bully | 0.91 | 0.88 | 0.86 | 0.98 | 0.95 | 0.92 | 0.94 | 0.91 | 0.89 |") !=
          std::string::npos);
}

TEST_CASE("render_table: fold-level and transfer rows are ignored by grid layouts") {
    std::vector<EvalRow> rows = {
        mean_row("F", true, "BLSTM_ATTN", "random", "bully", 0.91, 0.98, 0.94)};
    EvalRow fold = rows[0];
    fold.fold = "2";
    fold.precision = fold.recall = fold.f1 = 0.0;
    rows.push_back(fold);
    EvalRow transfer = rows[0];
    transfer.approach = "complete";
    transfer.precision = transfer.recall = transfer.f1 = 0.0;
    rows.push_back(transfer);
    const std::string table = render_table(rows, TableLayout::Table1a);
    CHECK(table.find("0.94") != std::string::npos);
    CHECK(table.find("0.00") == std::string::npos);
}

TEST_CASE("render_table: dimension sweeps average into one cell") {
    std::vector<EvalRow> rows = {
        mean_row("Y", true, "BLSTM_ATTN", "random", "bully", 0.5, 0.5, 0.5),
        mean_row("Y", true, "BLSTM_ATTN", "random", "bully", 0.7, 0.9, 0.7),
    };
    rows[0].dim = 25;
    rows[1].dim = 75;
    const std::string table = render_table(rows, TableLayout::Table4);
    CHECK(table.find("| Y+ | bully | 0.60 | 0.70 | 0.60 |") != std::string::npos);
}

TEST_CASE("render_table: two-architecture comparison reports F1 only") {
    std::vector<EvalRow> rows = {
        mean_row("F", false, "CNN", "random", "bully", 0.5, 0.36, 0.41),
        mean_row("F", false, "BLSTM_ATTN", "random", "bully", 0.37, 0.34, 0.35),
        mean_row("F", false, "LSTM", "random", "bully", 0.2, 0.2, 0.2),  // not a layout column
    };
    const std::string table = render_table(rows, TableLayout::Table2a);
    CHECK(table.find("F1 (Random, CNN)") != std::string::npos);
    CHECK(table.find("F1 (Random, BLSTM attention)") != std::string::npos);
    CHECK(table.find("Precision") == std::string::npos);
    CHECK(table.find("| F | bully | 0.41 | 0.35 |") != std::string::npos);
    CHECK(table.find("0.20") == std::string::npos);
}

TEST_CASE("render_table: architecture comparison filters to one embedding, oversampled only") {
    std::vector<EvalRow> rows;
    const char* archs[] = {"CNN", "LSTM", "BLSTM", "BLSTM_ATTN"};
    const double f1s[] = {0.74, 0.85, 0.76, 0.89};
    for (int i = 0; i < 4; ++i)
        rows.push_back(mean_row("F", true, archs[i], "sswe", "bully", 0.8, 0.9, f1s[i]));
    rows.push_back(mean_row("F", false, "CNN", "sswe", "bully", 0.1, 0.1, 0.1));   // original: out
    rows.push_back(mean_row("F", true, "CNN", "random", "bully", 0.2, 0.2, 0.2));  // wrong embedding
    const std::string table = render_table(rows, TableLayout::Table3a);
    const auto cnn = table.find("(CNN)");
    const auto lstm = table.find("(LSTM)");
    const auto blstm = table.find("(BLSTM)");
    const auto attn = table.find("(BLSTM attention)");
    REQUIRE(cnn != std::string::npos);
    REQUIRE(lstm != std::string::npos);
    REQUIRE(blstm != std::string::npos);
    REQUIRE(attn != std::string::npos);
    CHECK(cnn < lstm);
    CHECK(lstm < blstm);
    CHECK(blstm < attn);
    CHECK(table.find("| F+ | bully |") != std::string::npos);
    CHECK(table.find("| F | bully |") == std::string::npos);
    CHECK(table.find("0.10") == std::string::npos);
    CHECK(table.find("0.20") == std::string::npos);
    CHECK(table.find("| 0.74 | 0.85 | 0.76 | 0.89 |") != std::string::npos);
}

TEST_CASE("render_table: transfer table groups by source with a fixed approach order") {
    std::vector<EvalRow> rows;
    auto transfer_row = [](std::string source, std::string approach, double p, double r,
                           double f) {
        EvalRow row = mean_row("Y", false, "BLSTM_ATTN", "random", "bully", p, r, f);
        row.approach = std::move(approach);
        row.source_dataset = std::move(source);
        return row;
    };
    rows.push_back(transfer_row("W+", "model", 0.99, 0.96, 0.97));
    rows.push_back(transfer_row("W+", "complete", 0.68, 0.14, 0.23));
    rows.push_back(transfer_row("F+", "feature", 0.82, 0.50, 0.62));
    rows.push_back(transfer_row("W+", "feature", 0.81, 0.67, 0.74));
    const std::string table = render_table(rows, TableLayout::Table6);
    CHECK(table.find("| Source | Approach | Target | Class | Precision | Recall | F1 |") !=
          std::string::npos);
    CHECK(table.find("| W+ | Model Level | Y | bully | 0.99 | 0.96 | 0.97 |") != std::string::npos);
    CHECK(table.find("| W+ | Complete | Y | bully | 0.68 | 0.14 | 0.23 |") != std::string::npos);
    CHECK(table.find("| F+ | Feature Level |") < table.find("| W+ | Complete |"));
    CHECK(table.find("| W+ | Complete |") < table.find("| W+ | Feature Level |"));
    CHECK(table.find("| W+ | Feature Level |") < table.find("| W+ | Model Level |"));
}
