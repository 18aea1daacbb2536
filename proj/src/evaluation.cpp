#include "cbd/evaluation.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "cbd/csv.hpp"

namespace cbd {

ConfusionMatrix confusion_counts(const std::vector<std::size_t>& predictions,
                                 const std::vector<std::size_t>& labels,
                                 std::size_t class_count) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("confusion_counts: length mismatch: " +
                                    std::to_string(predictions.size()) + " predictions vs " +
                                    std::to_string(labels.size()) + " labels");
    ConfusionMatrix counts(class_count, std::vector<std::size_t>(class_count, 0));
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (labels[i] >= class_count || predictions[i] >= class_count)
            throw std::invalid_argument("confusion_counts: class index out of range at post " +
                                        std::to_string(i));
        ++counts[labels[i]][predictions[i]];
    }
    return counts;
}

void add_counts(ConfusionMatrix& into, const ConfusionMatrix& other) {
    if (into.empty()) {
        into = other;
        return;
    }
    if (into.size() != other.size())
        throw std::invalid_argument("add_counts: class count mismatch");
    for (std::size_t i = 0; i < into.size(); ++i)
        for (std::size_t j = 0; j < into.size(); ++j) into[i][j] += other[i][j];
}

double f1_score(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

Prf precision_recall_f1(const ConfusionMatrix& counts, std::size_t target_class) {
    if (target_class >= counts.size())
        throw std::invalid_argument("precision_recall_f1: target class out of range");
    std::size_t tp = counts[target_class][target_class];
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (i == target_class) continue;
        fp += counts[i][target_class];
        fn += counts[target_class][i];
    }
    Prf out;
    out.precision = (tp + fp) > 0 ? double(tp) / double(tp + fp) : 0.0;
    out.recall = (tp + fn) > 0 ? double(tp) / double(tp + fn) : 0.0;
    out.f1 = f1_score(out.precision, out.recall);
    return out;
}

Prf mean_prf(const std::vector<Prf>& folds) {
    if (folds.empty()) throw std::invalid_argument("mean_prf: no folds");
    Prf out;
    for (const auto& f : folds) {
        out.precision += f.precision;
        out.recall += f.recall;
        out.f1 += f.f1;
    }
    out.precision /= double(folds.size());
    out.recall /= double(folds.size());
    out.f1 /= double(folds.size());
    return out;
}

double mann_whitney_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double x : a)
        for (double y : b) {
            if (x > y)
                u += 1.0;
            else if (x == y)
                u += 0.5;
        }
    return u;
}

namespace {

void require_samples(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("mann_whitney_u: both samples must be non-empty");
}

// Number of assignments of the pooled sample yielding U = v equals the number
// of partitions of v into at most `parts` parts, each at most `largest`.
// Only evaluated for small v, so plain memoized recursion is plenty.
double partition_count(std::size_t v, std::size_t parts, std::size_t largest,
                       std::map<std::array<std::size_t, 3>, double>& memo) {
    if (v == 0) return 1.0;
    if (parts == 0 || largest == 0) return 0.0;
    parts = std::min(parts, v);
    largest = std::min(largest, v);
    const std::array<std::size_t, 3> key{v, parts, largest};
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    double total = 0.0;
    for (std::size_t first = 1; first <= largest; ++first)
        total += partition_count(v - first, parts - 1, first, memo);
    memo.emplace(key, total);
    return total;
}

double log_choose(std::size_t n, std::size_t k) {
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

// P(U <= u_lo) under the tie-free null, via the partition-count recurrence.
double exact_lower_tail(std::size_t u_lo, std::size_t m, std::size_t n) {
    std::map<std::array<std::size_t, 3>, double> memo;
    double ways = 0.0;
    for (std::size_t v = 0; v <= u_lo; ++v) ways += partition_count(v, m, n, memo);
    return ways / std::exp(log_choose(m + n, m));
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double mann_whitney_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
    require_samples(a, b);
    const std::size_t m = a.size();
    const std::size_t total = m + b.size();
    if (total > 20)
        throw std::invalid_argument("mann_whitney_exact_p: enumeration capped at 20 pooled values, got " +
                                    std::to_string(total));
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());

    const double mn = double(m) * double(b.size());
    const double u_obs = mann_whitney_statistic(a, b);
    const double u_lo = std::min(u_obs, mn - u_obs);
    const double u_hi = mn - u_lo;

    std::uint64_t in_tail = 0;
    std::uint64_t assignments = 0;
    std::vector<double> ga(m), gb(b.size());
    for (std::uint32_t mask = 0; mask < (1u << total); ++mask) {
        if (std::popcount(mask) != int(m)) continue;
        std::size_t ia = 0, ib = 0;
        for (std::size_t i = 0; i < total; ++i) {
            if (mask & (1u << i))
                ga[ia++] = pooled[i];
            else
                gb[ib++] = pooled[i];
        }
        const double u = mann_whitney_statistic(ga, gb);
        if (u <= u_lo + 1e-9 || u >= u_hi - 1e-9) ++in_tail;
        ++assignments;
    }
    return double(in_tail) / double(assignments);
}

double mann_whitney_approx_p(const std::vector<double>& a, const std::vector<double>& b) {
    require_samples(a, b);
    const double m = double(a.size());
    const double n = double(b.size());
    const double mn = m * n;
    const double u = mann_whitney_statistic(a, b);
    const double u_lo = std::min(u, mn - u);

    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    double tie_sum = 0.0;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        const double t = double(j - i);
        tie_sum += t * t * t - t;
        i = j;
    }

    // Tie-free with a small lower tail: count the tail exactly instead of
    // integrating a normal curve over a handful of discrete outcomes.
    if (tie_sum == 0.0 && u_lo <= 64.0)
        return std::clamp(2.0 * exact_lower_tail(std::size_t(u_lo), a.size(), b.size()), 0.0, 1.0);

    const double big_n = m + n;
    const double variance = mn / 12.0 * ((big_n + 1.0) - tie_sum / (big_n * (big_n - 1.0)));
    if (variance <= 0.0) return 1.0;  // every pooled value identical
    const double z = (u_lo - mn / 2.0 + 0.5) / std::sqrt(variance);
    return std::clamp(2.0 * standard_normal_cdf(z), 0.0, 1.0);
}

MannWhitney mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    require_samples(a, b);
    MannWhitney out;
    out.u = mann_whitney_statistic(a, b);
    out.exact = a.size() + b.size() <= 12;
    out.p = out.exact ? mann_whitney_exact_p(a, b) : mann_whitney_approx_p(a, b);
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const char* column) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("results csv: bad ") + column + " value '" + s + "'");
    }
}

std::uint64_t parse_u64(const std::string& s, const char* column) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("results csv: bad ") + column + " value '" + s + "'");
    }
}

constexpr const char* kResultsColumns[] = {"dataset", "oversampled", "architecture", "embedding",
                                           "class",   "fold",        "precision",    "recall",
                                           "f1",      "seed",        "mode",         "dim",
                                           "approach", "source_dataset"};

}  // namespace

std::string results_csv_header() {
    std::string out;
    for (const char* col : kResultsColumns) {
        if (!out.empty()) out += ',';
        out += col;
    }
    return out;
}

std::string results_csv_line(const EvalRow& row) {
    std::ostringstream os;
    write_csv_row(os, {row.dataset, row.oversampled ? "true" : "false", row.architecture,
                       row.embedding, row.clazz, row.fold, format_double(row.precision),
                       format_double(row.recall), format_double(row.f1), std::to_string(row.seed),
                       row.mode, std::to_string(row.dim), row.approach, row.source_dataset});
    std::string line = os.str();
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    return line;
}

void write_results_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << results_csv_header() << '\n';
    for (const auto& row : rows) out << results_csv_line(row) << '\n';
    if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

std::vector<EvalRow> read_results_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path.string());
    constexpr std::size_t n_cols = std::size(kResultsColumns);
    std::size_t index[n_cols];
    for (std::size_t c = 0; c < n_cols; ++c) {
        auto found = table.column(kResultsColumns[c]);
        if (!found)
            throw std::runtime_error("results csv: missing column '" +
                                     std::string(kResultsColumns[c]) + "' in " + path.string());
        index[c] = *found;
    }
    std::vector<EvalRow> rows;
    rows.reserve(table.rows.size());
    for (const auto& fields : table.rows) {
        if (fields.size() != table.header.size())
            throw std::runtime_error("results csv: ragged row in " + path.string());
        EvalRow row;
        row.dataset = fields[index[0]];
        const std::string& over = fields[index[1]];
        if (over != "true" && over != "false")
            throw std::runtime_error("results csv: bad oversampled value '" + over + "'");
        row.oversampled = over == "true";
        row.architecture = fields[index[2]];
        row.embedding = fields[index[3]];
        row.clazz = fields[index[4]];
        row.fold = fields[index[5]];
        row.precision = parse_double(fields[index[6]], "precision");
        row.recall = parse_double(fields[index[7]], "recall");
        row.f1 = parse_double(fields[index[8]], "f1");
        row.seed = parse_u64(fields[index[9]], "seed");
        row.mode = fields[index[10]];
        row.dim = parse_u64(fields[index[11]], "dim");
        row.approach = fields[index[12]];
        row.source_dataset = fields[index[13]];
        rows.push_back(std::move(row));
    }
    return rows;
}

TableLayout table_layout_from_string(const std::string& name) {
    if (name == "table1a") return TableLayout::Table1a;
    if (name == "table2a") return TableLayout::Table2a;
    if (name == "table3a") return TableLayout::Table3a;
    if (name == "table4") return TableLayout::Table4;
    if (name == "table5") return TableLayout::Table5;
    if (name == "table6") return TableLayout::Table6;
    throw std::invalid_argument("unknown table layout '" + name +
                                "' (expected table1a|table2a|table3a|table4|table5|table6)");
}

std::string to_string(TableLayout layout) {
    switch (layout) {
        case TableLayout::Table1a: return "table1a";
        case TableLayout::Table2a: return "table2a";
        case TableLayout::Table3a: return "table3a";
        case TableLayout::Table4: return "table4";
        case TableLayout::Table5: return "table5";
        case TableLayout::Table6: return "table6";
    }
    throw std::logic_error("unreachable table layout");
}

namespace {

const std::vector<std::string> kEmbeddingOrder = {"random", "glove", "sswe"};
const std::vector<std::string> kArchOrder = {"CNN", "LSTM", "BLSTM", "BLSTM_ATTN"};
const std::vector<std::string> kApproachOrder = {"complete", "feature", "model"};

// Canonical position in `order`, with unknown values after the known ones in
// lexicographic order.
std::pair<std::size_t, std::string> order_key(const std::string& v,
                                              const std::vector<std::string>& order) {
    for (std::size_t i = 0; i < order.size(); ++i)
        if (order[i] == v) return {i, std::string()};
    return {order.size(), v};
}

std::string display_embedding(const std::string& tag) {
    if (tag == "random") return "Random";
    if (tag == "glove") return "GloVe";
    if (tag == "sswe") return "SSWE";
    return tag;
}

std::string display_arch(const std::string& tag) {
    if (tag == "BLSTM_ATTN") return "BLSTM attention";
    return tag;
}

std::string display_approach(const std::string& tag) {
    if (tag == "complete") return "Complete";
    if (tag == "feature") return "Feature Level";
    if (tag == "model") return "Model Level";
    return tag;
}

std::string display_dataset(const std::string& dataset, bool oversampled) {
    return oversampled ? dataset + "+" : dataset;
}

std::string format_cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct RowKey {
    std::string dataset;
    bool oversampled = false;
    std::string clazz;
    auto operator<=>(const RowKey&) const = default;
};

// Mean over every dimension at which the cell was measured; empty if unseen.
class CellAverager {
  public:
    void add(const Prf& value) {
        sum_.precision += value.precision;
        sum_.recall += value.recall;
        sum_.f1 += value.f1;
        ++count_;
    }
    bool empty() const { return count_ == 0; }
    Prf mean() const {
        Prf out = sum_;
        out.precision /= double(count_);
        out.recall /= double(count_);
        out.f1 /= double(count_);
        return out;
    }

  private:
    Prf sum_;
    std::size_t count_ = 0;
};

std::string markdown_table(const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& body) {
    auto emit_row = [](const std::vector<std::string>& cells) {
        std::string line = "|";
        for (const auto& c : cells) line += " " + c + " |";
        return line + "\n";
    };
    std::string out = emit_row(header);
    std::string rule = "|";
    for (std::size_t i = 0; i < header.size(); ++i) rule += " --- |";
    out += rule + "\n";
    for (const auto& row : body) out += emit_row(row);
    return out;
}

// Tables 1a/2a/3a/4/5 share one skeleton: rows keyed by (dataset,
// oversampled?, class), columns a metric × variant grid filled from the mean
// rows.  `variants` picks the per-metric column split (embeddings or
// architectures) and `select` decides which rows participate.
struct GridSpec {
    std::vector<std::string> metrics;                       // subset of P/R/F1
    std::vector<std::pair<std::string, std::string>> cols;  // (tag, display) per metric
    std::function<bool(const EvalRow&)> select;
    std::function<std::string(const EvalRow&)> column_tag;
};

std::string render_grid(const std::vector<EvalRow>& rows, const GridSpec& spec) {
    std::map<RowKey, std::map<std::string, CellAverager>> cells;
    for (const auto& row : rows) {
        if (row.fold != "mean" || !row.approach.empty()) continue;
        if (!spec.select(row)) continue;
        cells[{row.dataset, row.oversampled, row.clazz}][spec.column_tag(row)].add(
            {row.precision, row.recall, row.f1});
    }
    std::vector<std::string> header = {"Dataset", "Class"};
    for (const auto& metric : spec.metrics)
        for (const auto& [tag, display] : spec.cols) header.push_back(metric + " (" + display + ")");
    std::vector<std::vector<std::string>> body;
    for (const auto& [key, by_tag] : cells) {
        std::vector<std::string> line = {display_dataset(key.dataset, key.oversampled), key.clazz};
        for (const auto& metric : spec.metrics)
            for (const auto& [tag, display] : spec.cols) {
                auto it = by_tag.find(tag);
                if (it == by_tag.end() || it->second.empty()) {
                    line.push_back("—");
                    continue;
                }
                const Prf mean = it->second.mean();
                const double v = metric == "Precision" ? mean.precision
                                 : metric == "Recall"  ? mean.recall
                                                       : mean.f1;
                line.push_back(format_cell(v));
            }
        body.push_back(std::move(line));
    }
    return markdown_table(header, body);
}

std::vector<std::pair<std::string, std::string>> embedding_columns(
    const std::vector<EvalRow>& rows) {
    std::set<std::pair<std::size_t, std::string>> seen;
    std::vector<std::string> tags;
    for (const auto& row : rows) {
        if (row.fold != "mean" || !row.approach.empty()) continue;
        auto key = order_key(row.embedding, kEmbeddingOrder);
        if (seen.insert({key.first, row.embedding}).second) tags.push_back(row.embedding);
    }
    std::sort(tags.begin(), tags.end(), [](const std::string& a, const std::string& b) {
        return order_key(a, kEmbeddingOrder) < order_key(b, kEmbeddingOrder);
    });
    std::vector<std::pair<std::string, std::string>> cols;
    for (const auto& t : tags) cols.push_back({t, display_embedding(t)});
    return cols;
}

std::string render_transfer_table(const std::vector<EvalRow>& rows) {
    struct TransferKey {
        std::pair<std::size_t, std::string> approach_rank;
        std::string source;
        std::string target;
        std::string clazz;
        std::string approach;
        auto operator<=>(const TransferKey&) const = default;
    };
    std::map<TransferKey, CellAverager> cells;
    for (const auto& row : rows) {
        if (row.fold != "mean" || row.approach.empty()) continue;
        TransferKey key;
        key.source = row.source_dataset;
        key.target = row.dataset;
        key.approach = row.approach;
        key.approach_rank = order_key(row.approach, kApproachOrder);
        key.clazz = row.clazz;
        cells[key].add({row.precision, row.recall, row.f1});
    }
    // Paper ordering: grouped by source, approaches in fixed order within.
    std::map<std::tuple<std::string, std::pair<std::size_t, std::string>, std::string, std::string>,
             CellAverager>
        ordered;
    for (const auto& [key, cell] : cells)
        ordered[{key.source, key.approach_rank, key.target, key.clazz}] = cell;
    std::vector<std::vector<std::string>> body;
    for (const auto& [key, cell] : ordered) {
        const auto& [source, approach_rank, target, clazz] = key;
        const std::string approach =
            approach_rank.first < kApproachOrder.size() ? kApproachOrder[approach_rank.first]
                                                        : approach_rank.second;
        const Prf mean = cell.mean();
        body.push_back({source, display_approach(approach), target, clazz,
                        format_cell(mean.precision), format_cell(mean.recall),
                        format_cell(mean.f1)});
    }
    return markdown_table({"Source", "Approach", "Target", "Class", "Precision", "Recall", "F1"},
                          body);
}

}  // namespace

std::string render_table(const std::vector<EvalRow>& rows, TableLayout layout) {
    switch (layout) {
        case TableLayout::Table1a:
        case TableLayout::Table4: {
            GridSpec spec;
            spec.metrics = {"Precision", "Recall", "F1"};
            spec.cols = embedding_columns(rows);
            spec.select = [](const EvalRow& r) { return r.architecture == "BLSTM_ATTN"; };
            spec.column_tag = [](const EvalRow& r) { return r.embedding; };
            return render_grid(rows, spec);
        }
        case TableLayout::Table2a: {
            // F1 only, embeddings × (CNN, BLSTM attention).
            GridSpec spec;
            spec.metrics = {"F1"};
            for (const auto& [tag, display] : embedding_columns(rows))
                for (const std::string arch : {"CNN", "BLSTM_ATTN"})
                    spec.cols.push_back({tag + "/" + arch, display + ", " + display_arch(arch)});
            spec.select = [](const EvalRow& r) {
                return r.architecture == "CNN" || r.architecture == "BLSTM_ATTN";
            };
            spec.column_tag = [](const EvalRow& r) { return r.embedding + "/" + r.architecture; };
            return render_grid(rows, spec);
        }
        case TableLayout::Table3a:
        case TableLayout::Table5: {
            GridSpec spec;
            spec.metrics = {"Precision", "Recall", "F1"};
            for (const auto& arch : kArchOrder) spec.cols.push_back({arch, display_arch(arch)});
            spec.select = [](const EvalRow& r) { return r.embedding == "sswe" && r.oversampled; };
            spec.column_tag = [](const EvalRow& r) { return r.architecture; };
            return render_grid(rows, spec);
        }
        case TableLayout::Table6: return render_transfer_table(rows);
    }
    throw std::logic_error("unreachable table layout");
}

}  // namespace cbd
