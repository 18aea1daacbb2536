#include "cbd/runner.hpp"

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "cbd/experiment.hpp"
#include "cbd/model_io.hpp"
#include "cbd/transfer.hpp"

namespace cbd {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string checksum_hex(std::uint64_t value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(value));
    return buffer;
}

// One unit of pool work; `run` returns the rows to append for this cell.
struct Cell {
    std::string label;
    std::uint64_t seed = 0;
    std::function<std::vector<EvalRow>()> run;
};

struct CellOutcome {
    std::vector<EvalRow> rows;
    std::string error;  // nonempty → failed
    double seconds = 0.0;
};

// Runs cells on `jobs` workers. Outcomes land in cell order regardless of
// which worker finishes first, so everything downstream is deterministic.
// `on_done` runs on the coordinating thread, in order, as cells finish.
std::vector<CellOutcome> run_pool(const std::vector<Cell>& cells, std::size_t jobs,
                                  const std::function<void(std::size_t, const CellOutcome&)>&
                                      on_done) {
    std::vector<CellOutcome> outcomes(cells.size());
    if (cells.empty()) return outcomes;

    std::atomic<std::size_t> next{0};
    std::vector<char> done(cells.size(), 0);
    std::mutex mu;
    std::condition_variable cv;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            CellOutcome outcome;
            const auto start = std::chrono::steady_clock::now();
            try {
                outcome.rows = cells[i].run();
            } catch (const std::exception& e) {
                outcome.error = e.what();
            }
            outcome.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                    .count();
            {
                std::lock_guard<std::mutex> lock(mu);
                outcomes[i] = std::move(outcome);
                done[i] = 1;
            }
            cv.notify_all();
        }
    };

    const std::size_t n_workers = std::max<std::size_t>(1, std::min(jobs, cells.size()));
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);

    {
        std::unique_lock<std::mutex> lock(mu);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            cv.wait(lock, [&] { return done[i] == 1; });
            lock.unlock();
            on_done(i, outcomes[i]);
            lock.lock();
        }
    }
    for (auto& t : threads) t.join();
    return outcomes;
}

// results.csv is append-only: one flush+fsync per finished cell, so a crash
// mid-run leaves every previously written row intact.
class ResultsWriter {
public:
    explicit ResultsWriter(const std::string& path) : file_(std::fopen(path.c_str(), "wb")) {
        if (!file_) throw std::runtime_error("cannot write " + path);
        const std::string header = results_csv_header() + "\n";
        std::fwrite(header.data(), 1, header.size(), file_);
        sync();
    }
    ~ResultsWriter() {
        if (file_) std::fclose(file_);
    }
    void append(const std::vector<EvalRow>& rows) {
        for (const auto& row : rows) {
            const std::string line = results_csv_line(row) + "\n";
            std::fwrite(line.data(), 1, line.size(), file_);
        }
        sync();
    }

private:
    void sync() {
        std::fflush(file_);
        ::fsync(fileno(file_));
    }
    std::FILE* file_;
};

struct DatasetBundle {
    const DatasetSpec* spec = nullptr;
    LabeledCorpus corpus;
};

std::string variant_name(const std::string& dataset, bool oversampled) {
    return oversampled ? dataset + "+" : dataset;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    RunSummary summary;

    fs::create_directories(config.output_dir);
    fs::create_directories(fs::path(config.output_dir) / "tables");
    fs::create_directories(fs::path(config.output_dir) / "folds");
    fs::create_directories(fs::path(config.output_dir) / "models");

    const StopwordSet stopwords = config.stopwords_path.empty()
                                      ? StopwordSet{}
                                      : load_stopwords(config.stopwords_path);

    // --- inputs -----------------------------------------------------------
    std::map<std::string, DatasetBundle> corpora;  // dataset name → corpus
    for (const auto& spec : config.datasets) {
        try {
            DatasetBundle bundle;
            bundle.spec = &spec;
            bundle.corpus = load_corpus(spec.path, spec.schema, spec.classes, spec.name);
            corpora.emplace(spec.name, std::move(bundle));
        } catch (const std::exception& e) {
            summary.failures.push_back("dataset " + spec.name + ": " + e.what());
        }
    }

    std::map<std::string, const EmbeddingSpec*> embeddings;
    ordered_json embedding_checksums = ordered_json::object();
    for (const auto& spec : config.embeddings) {
        embeddings[spec.name] = &spec;
        if (!spec.path.empty()) embedding_checksums[spec.name] = checksum_hex(file_checksum(spec.path));
    }
    auto embedding_init = [&](const std::string& name) {
        const EmbeddingSpec* spec = embeddings.at(name);
        return spec->path.empty() ? random_embedding_init()
                                  : pretrained_embedding_init(spec->path);
    };

    const bool with_oversampled = config.oversample_factor > 1;

    // One fold plan per dataset variant, shared by every cell that trains on
    // it. In strict mode both variants split the original posts, so they
    // share a single plan; fidelity mode splits the oversampled corpus and
    // needs its own.
    auto plan_label = [&](const std::string& dataset, bool oversampled) {
        const bool own_plan = oversampled && config.mode == SplitMode::Fidelity;
        return variant_name(dataset, own_plan);
    };
    auto fold_seed_for = [&](const std::string& dataset, bool oversampled) {
        return derive_seed(config.seed, "folds|" + plan_label(dataset, oversampled));
    };
    auto fold_config_for = [&](const DatasetSpec& spec, bool oversampled) {
        FoldConfig fold_config;
        fold_config.mode = config.mode;
        fold_config.oversample_class = spec.oversample_class;
        fold_config.oversample_factor = oversampled ? config.oversample_factor : 1;
        return fold_config;
    };

    // --- fold manifests ----------------------------------------------------
    ordered_json fold_files = ordered_json::object();
    for (const auto& spec : config.datasets) {
        auto it = corpora.find(spec.name);
        if (it == corpora.end()) continue;
        for (bool oversampled : {false, true}) {
            if (oversampled && !with_oversampled) continue;
            const std::string label = plan_label(spec.name, oversampled);
            if (fold_files.contains(label)) continue;
            const std::uint64_t seed = fold_seed_for(spec.name, oversampled);
            const LabeledCorpus plan_corpus =
                corpus_for_mode(it->second.corpus, fold_config_for(spec, oversampled));
            const FoldPlan plan = kfold_split(plan_corpus, config.k, seed);
            std::vector<std::vector<std::string>> ids(config.k);
            for (const auto& post : plan_corpus.posts)
                ids[plan.fold_of(post.id)].push_back(post.id);
            ordered_json doc;
            doc["dataset"] = spec.name;
            doc["variant"] = label;
            doc["mode"] = to_string(config.mode);
            doc["seed"] = seed;
            doc["k"] = config.k;
            doc["folds"] = ids;
            const fs::path path = fs::path(config.output_dir) / "folds" / (label + ".json");
            std::ofstream out(path);
            out << doc.dump(2) << "\n";
            fold_files[label] = path.generic_string();
        }
    }

    // --- the grid -----------------------------------------------------------
    std::vector<Cell> grid;
    for (const auto& spec : config.datasets) {
        auto it = corpora.find(spec.name);
        if (it == corpora.end()) continue;
        const LabeledCorpus* corpus = &it->second.corpus;
        for (bool oversampled : {false, true}) {
            if (oversampled && !with_oversampled) continue;
            for (const auto& arch_name : config.architectures) {
                for (const auto& emb : config.embeddings) {
                    for (std::size_t dim : config.dimensions) {
                        Cell cell;
                        cell.label = variant_name(spec.name, oversampled) + "|" + arch_name +
                                     "|" + emb.name + "|d" + std::to_string(dim);
                        cell.seed = derive_seed(config.seed, cell.label);
                        CvOptions options;
                        options.k = config.k;
                        options.fold_config = fold_config_for(spec, oversampled);
                        options.hp = config.hp;
                        options.dim = dim;
                        options.seed = cell.seed;
                        options.fold_seed = fold_seed_for(spec.name, oversampled);
                        options.arch = architecture_from_string(arch_name);
                        options.embedding = embedding_init(emb.name);
                        options.dataset_tag = variant_name(spec.name, oversampled);
                        CellTags tags;
                        tags.dataset = spec.name;
                        tags.oversampled = oversampled;
                        tags.architecture = arch_name;
                        tags.embedding = emb.name;
                        tags.dim = dim;
                        tags.seed = cell.seed;
                        tags.mode = to_string(config.mode);
                        cell.run = [corpus, &stopwords, options, tags] {
                            return outcome_rows(run_cv(*corpus, stopwords, options), tags);
                        };
                        grid.push_back(std::move(cell));
                    }
                }
            }
        }
    }

    const std::size_t jobs =
        config.jobs ? config.jobs
                    : std::max<std::size_t>(1, std::thread::hardware_concurrency());

    ResultsWriter writer((fs::path(config.output_dir) / "results.csv").generic_string());
    ordered_json cell_log = ordered_json::array();

    auto record = [&](const std::string& phase, const Cell& cell, const CellOutcome& outcome) {
        ordered_json entry;
        entry["phase"] = phase;
        entry["label"] = cell.label;
        entry["seed"] = cell.seed;
        entry["status"] = outcome.error.empty() ? "ok" : "failed";
        if (!outcome.error.empty()) entry["error"] = outcome.error;
        entry["seconds"] = outcome.seconds;
        cell_log.push_back(entry);
        if (!outcome.error.empty()) {
            summary.failures.push_back(cell.label + ": " + outcome.error);
            std::fprintf(stderr, "  %-48s FAILED: %s\n", cell.label.c_str(),
                         outcome.error.c_str());
        } else {
            std::fprintf(stderr, "  %-48s ok  %5.1fs  %zu rows\n", cell.label.c_str(),
                         outcome.seconds, outcome.rows.size());
        }
    };

    std::fprintf(stderr, "grid: %zu cells on %zu workers\n", grid.size(), jobs);
    run_pool(grid, jobs, [&](std::size_t i, const CellOutcome& outcome) {
        record("grid", grid[i], outcome);
        if (outcome.error.empty()) {
            writer.append(outcome.rows);
            summary.rows.insert(summary.rows.end(), outcome.rows.begin(), outcome.rows.end());
        }
    });

    // --- transfer source models ---------------------------------------------
    struct SourceJob {
        std::string key;
        const DatasetSpec* spec = nullptr;
        const LabeledCorpus* corpus = nullptr;
        std::string arch;
        std::string embedding;
        std::size_t dim = 0;
    };
    std::vector<SourceJob> source_jobs;
    for (const auto& transfer : config.transfers) {
        auto it = corpora.find(transfer.source);
        if (it == corpora.end()) continue;
        SourceJob job;
        job.key = transfer.source + "_" + transfer.architecture + "_" + transfer.embedding +
                  "_d" + std::to_string(transfer.dimension);
        if (std::any_of(source_jobs.begin(), source_jobs.end(),
                        [&](const SourceJob& existing) { return existing.key == job.key; }))
            continue;
        job.spec = it->second.spec;
        job.corpus = &it->second.corpus;
        job.arch = transfer.architecture;
        job.embedding = transfer.embedding;
        job.dim = transfer.dimension;
        source_jobs.push_back(std::move(job));
    }

    std::map<std::string, FullTrainResult> sources;
    if (!source_jobs.empty()) {
        std::vector<Cell> cells;
        std::vector<FullTrainResult> trained(source_jobs.size());
        for (std::size_t i = 0; i < source_jobs.size(); ++i) {
            const SourceJob& job = source_jobs[i];
            Cell cell;
            cell.label = "source|" + job.key;
            cell.seed = derive_seed(config.seed, cell.label);
            cell.run = [&, i, seed = cell.seed]() -> std::vector<EvalRow> {
                const SourceJob& j = source_jobs[i];
                CvOptions options;
                options.k = config.k;
                options.fold_config.mode = config.mode;
                options.fold_config.oversample_class = j.spec->oversample_class;
                options.fold_config.oversample_factor = config.oversample_factor;
                options.hp = config.hp;
                options.dim = j.dim;
                options.seed = seed;
                options.arch = architecture_from_string(j.arch);
                options.embedding = embedding_init(j.embedding);
                options.dataset_tag = variant_name(j.spec->name, with_oversampled);
                trained[i] = train_full(*j.corpus, stopwords, options);
                const fs::path dir = fs::path(config.output_dir) / "models" / j.key;
                save_model(trained[i].bundle, trained[i].vocab, dir.generic_string());
                return {};
            };
            cells.push_back(std::move(cell));
        }
        std::fprintf(stderr, "transfer sources: %zu models\n", cells.size());
        run_pool(cells, jobs, [&](std::size_t i, const CellOutcome& outcome) {
            record("source", cells[i], outcome);
            if (outcome.error.empty()) sources[source_jobs[i].key] = std::move(trained[i]);
        });
    }

    // --- transfer jobs -------------------------------------------------------
    std::vector<Cell> transfer_cells;
    for (const auto& transfer : config.transfers) {
        const std::string source_key = transfer.source + "_" + transfer.architecture + "_" +
                                       transfer.embedding + "_d" +
                                       std::to_string(transfer.dimension);
        auto target_it = corpora.find(transfer.target);
        for (const auto& approach : transfer.approaches) {
            Cell cell;
            cell.label = "transfer|" + transfer.source + "->" + transfer.target + "|" +
                         approach + "|" + transfer.architecture + "|" + transfer.embedding +
                         "|d" + std::to_string(transfer.dimension);
            cell.seed = derive_seed(config.seed, cell.label);
            if (target_it == corpora.end()) {
                cell.run = [name = transfer.target]() -> std::vector<EvalRow> {
                    throw std::runtime_error("target dataset unavailable: " + name);
                };
                transfer_cells.push_back(std::move(cell));
                continue;
            }
            const LabeledCorpus* target = &target_it->second.corpus;
            auto source_lookup = [&sources, source_key]() -> const FullTrainResult& {
                auto it = sources.find(source_key);
                if (it == sources.end())
                    throw std::runtime_error("source model unavailable: " + source_key);
                return it->second;
            };
            cell.run = [&, cell_seed = cell.seed, approach, transfer, target,
                        source_lookup]() -> std::vector<EvalRow> {
                const FullTrainResult& source = source_lookup();
                TransferTags tags;
                tags.target_dataset = transfer.target;
                tags.source_dataset = transfer.source;
                tags.embedding = transfer.embedding;
                tags.seed = cell_seed;
                tags.mode = "strict";
                if (approach == "complete")
                    return transfer_complete(source.bundle, source.vocab, *target, stopwords,
                                             tags)
                        .rows;
                CvOptions options;
                options.k = config.k;
                options.fold_config.mode = SplitMode::Strict;  // target-side protocol
                options.hp = config.hp;
                options.dim = transfer.dimension;
                options.seed = cell_seed;
                options.fold_seed = fold_seed_for(transfer.target, false);
                options.arch = architecture_from_string(transfer.architecture);
                options.embedding = embedding_init(transfer.embedding);
                options.dataset_tag = transfer.target;
                if (approach == "feature")
                    return transfer_feature_level(source.bundle, source.vocab, *target,
                                                  stopwords, options, tags)
                        .rows;
                return transfer_model_level(source.bundle, source.vocab, *target, stopwords,
                                            options, tags)
                    .rows;
            };
            transfer_cells.push_back(std::move(cell));
        }
    }
    if (!transfer_cells.empty()) {
        std::fprintf(stderr, "transfer jobs: %zu cells\n", transfer_cells.size());
        run_pool(transfer_cells, jobs, [&](std::size_t i, const CellOutcome& outcome) {
            record("transfer", transfer_cells[i], outcome);
            if (outcome.error.empty()) {
                writer.append(outcome.rows);
                summary.rows.insert(summary.rows.end(), outcome.rows.begin(),
                                    outcome.rows.end());
            }
        });
    }

    // --- tables --------------------------------------------------------------
    for (TableLayout layout : {TableLayout::Table1a, TableLayout::Table2a,
                               TableLayout::Table3a, TableLayout::Table4,
                               TableLayout::Table5, TableLayout::Table6}) {
        const fs::path path =
            fs::path(config.output_dir) / "tables" / (to_string(layout) + ".md");
        std::ofstream out(path);
        out << render_table(summary.rows, layout);
    }

    // --- significance: oversampled vs original, per dataset/architecture/class
    ordered_json significance = ordered_json::array();
    if (with_oversampled) {
        for (const auto& spec : config.datasets) {
            if (!corpora.count(spec.name)) continue;
            for (const auto& arch : config.architectures) {
                for (const auto& clazz : spec.classes) {
                    std::vector<double> original, oversampled;
                    for (const auto& row : summary.rows) {
                        if (row.dataset != spec.name || row.architecture != arch ||
                            row.clazz != clazz || !row.approach.empty())
                            continue;
                        if (row.fold == "mean" || row.fold == "pooled") continue;
                        (row.oversampled ? oversampled : original).push_back(row.f1);
                    }
                    if (original.empty() || oversampled.empty()) continue;
                    const MannWhitney test = mann_whitney_u(oversampled, original);
                    ordered_json entry;
                    entry["dataset"] = spec.name;
                    entry["architecture"] = arch;
                    entry["class"] = clazz;
                    entry["comparison"] = "oversampled vs original, per-fold F1 pooled "
                                          "across embeddings and dimensions";
                    entry["n_oversampled"] = oversampled.size();
                    entry["n_original"] = original.size();
                    entry["u"] = test.u;
                    entry["p"] = test.p;
                    entry["exact"] = test.exact;
                    significance.push_back(entry);
                }
            }
        }
    }

    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // --- manifest --------------------------------------------------------------
    ordered_json manifest;
    manifest["config_checksum"] = checksum_hex(config.source_checksum);
    manifest["seed"] = config.seed;
    manifest["mode"] = to_string(config.mode);
    manifest["k"] = config.k;
    manifest["jobs_configured"] = config.jobs;
    manifest["config"] = ordered_json::parse(normalized_config_json(config));
    manifest["embedding_file_checksums"] = embedding_checksums;
    manifest["fold_manifests"] = fold_files;
    manifest["cells"] = cell_log;
    manifest["significance"] = significance;
    manifest["significance_note"] =
        "p-values computed over per-fold F1 scores; whether the reference analysis used "
        "fold scores or bootstrap resamples is not stated, so this choice is flagged here";
    manifest["row_count"] = summary.rows.size();
    manifest["failures"] = summary.failures;
    manifest["wall_clock_seconds"] = summary.wall_seconds;

    const fs::path manifest_path = fs::path(config.output_dir) / "manifest.json";
    {
        std::ofstream out(manifest_path);
        out << manifest.dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(config.output_dir) / "config.json");
        out << normalized_config_json(config);
    }

    summary.results_csv = (fs::path(config.output_dir) / "results.csv").generic_string();
    summary.manifest_path = manifest_path.generic_string();
    summary.exit_code = summary.failures.empty() ? 0 : 2;
    std::fprintf(stderr, "done: %zu rows, %zu failures, %.1fs\n", summary.rows.size(),
                 summary.failures.size(), summary.wall_seconds);
    return summary;
}

} // namespace cbd
