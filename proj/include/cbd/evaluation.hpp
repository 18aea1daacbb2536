#pragma once
// Evaluation: confusion-matrix metrics, Mann-Whitney significance testing,
// results-CSV serialization, and markdown report tables.  Pure computation
// over plain values; everything here is safe to call concurrently.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cbd {

// counts[i][j] = number of posts with true class i predicted as class j.
using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

ConfusionMatrix confusion_counts(const std::vector<std::size_t>& predictions,
                                 const std::vector<std::size_t>& labels,
                                 std::size_t class_count);

// Element-wise accumulation, used to pool fold-level counts.
void add_counts(ConfusionMatrix& into, const ConfusionMatrix& other);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// 2PR/(P+R); 0 when the denominator is 0.
double f1_score(double precision, double recall);

// One-vs-rest metrics for `target_class`; zero denominators yield 0.
Prf precision_recall_f1(const ConfusionMatrix& counts, std::size_t target_class);

// Arithmetic mean of per-fold metrics (the headline aggregation).
Prf mean_prf(const std::vector<Prf>& folds);

struct MannWhitney {
    double u = 0.0;   // U statistic of the first sample
    double p = 1.0;   // two-sided p-value
    bool exact = false;
};

// Two-sided Mann-Whitney U test.  Exact permutation enumeration when the
// pooled sample has at most 12 values; the tail-refined approximation
// otherwise.  Throws std::invalid_argument on an empty sample.
MannWhitney mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

// U statistic of `a`: #{(x,y) in a×b : x > y} + 0.5 · #ties.
double mann_whitney_statistic(const std::vector<double>& a, const std::vector<double>& b);

// Both halves of the hybrid are exposed so they can be cross-checked against
// each other.  The exact path enumerates every group assignment (pooled size
// capped at 20 — past that the enumeration is no longer cheap).  The
// approximation is a normal curve with tie and continuity corrections; for
// tie-free samples with a small tail it sharpens itself with an exact tail
// count, which keeps it honest at the small sizes where a plain normal curve
// is off by far more than 0.01.
double mann_whitney_exact_p(const std::vector<double>& a, const std::vector<double>& b);
double mann_whitney_approx_p(const std::vector<double>& a, const std::vector<double>& b);

// One row of results.csv: a (dataset, architecture, embedding, class, fold)
// cell.  `fold` is a 0-based index, "mean" (arithmetic mean of folds) or
// "pooled" (recomputed from summed confusion counts).  `approach` and
// `source_dataset` are empty except for transfer-learning rows.
struct EvalRow {
    std::string dataset;
    bool oversampled = false;
    std::string architecture;
    std::string embedding;
    std::string clazz;
    std::string fold;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t seed = 0;
    std::string mode;
    std::size_t dim = 0;
    std::string approach;
    std::string source_dataset;

    bool operator==(const EvalRow&) const = default;
};

std::string results_csv_header();
std::string results_csv_line(const EvalRow& row);
void write_results_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows);
std::vector<EvalRow> read_results_csv(const std::filesystem::path& path);

enum class TableLayout { Table1a, Table2a, Table3a, Table4, Table5, Table6 };

TableLayout table_layout_from_string(const std::string& name);
std::string to_string(TableLayout layout);

// Renders the aggregate ("mean") rows of a report as a markdown table in the
// requested layout, values rounded to 2 decimals, missing cells as "—".
// When a cell is covered at several embedding dimensions the dimensions are
// averaged.  Ordering is deterministic: datasets ascending with original
// before oversampled, then class ascending.
std::string render_table(const std::vector<EvalRow>& rows, TableLayout layout);

}  // namespace cbd
