#pragma once
// Experiment configuration: a JSON file describing datasets, the model grid,
// oversampling, cross-validation, and transfer jobs. Loading validates
// everything up front and reports every violation at once, so a bad config
// never gets halfway through a run.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbd/datasets.hpp"
#include "cbd/model.hpp"

namespace cbd {

struct EmbeddingSpec {
    std::string name;  // "random", or a tag like "glove"/"sswe" for a vector file
    std::string path;  // word-vector text file; empty for "random"

    friend bool operator==(const EmbeddingSpec&, const EmbeddingSpec&) = default;
};

struct DatasetSpec {
    std::string name;
    std::string path;  // CSV with a header row
    CsvSchema schema;
    std::vector<std::string> classes;
    std::string oversample_class;  // filled from the global default when absent

    friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct TransferSpec {
    std::string source;  // dataset name; a full-corpus source model is trained on it
    std::string target;  // dataset name
    std::vector<std::string> approaches;  // any of "complete", "feature", "model"
    std::string architecture = "BLSTM_ATTN";
    std::string embedding = "random";  // embedding spec name for both sides
    std::size_t dimension = 0;         // 0 → first configured dimension

    friend bool operator==(const TransferSpec&, const TransferSpec&) = default;
};

struct ExperimentConfig {
    std::string output_dir = "results";
    std::uint64_t seed = 42;
    SplitMode mode = SplitMode::Strict;
    std::size_t k = 5;
    std::size_t jobs = 0;  // worker threads; 0 → hardware concurrency
    std::string stopwords_path;
    std::string oversample_class = "bully";
    std::size_t oversample_factor = 3;
    std::vector<std::string> architectures = {"CNN", "LSTM", "BLSTM", "BLSTM_ATTN"};
    std::vector<EmbeddingSpec> embeddings = {{"random", ""}};
    std::vector<std::size_t> dimensions = {50};
    Hyperparams hp;
    std::vector<DatasetSpec> datasets;
    std::vector<TransferSpec> transfers;
    std::uint64_t source_checksum = 0;  // checksum of the config file bytes
};

// Carries every violation found, not just the first; what() joins them.
struct ConfigError : std::runtime_error {
    std::vector<std::string> violations;
    explicit ConfigError(std::vector<std::string> all);
};

// Parses, validates, and fills defaults. Relative paths resolve against the
// config file's directory. Throws ConfigError listing every problem.
ExperimentConfig load_config(const std::string& path);

// Same, over in-memory JSON text; `base_dir` anchors relative paths.
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir);

// Canonical echo of a config with all defaults made explicit; stable key
// order, so equal configs produce identical text.
std::string normalized_config_json(const ExperimentConfig& config);

// Checksum of a file's raw bytes (FNV-1a 64); throws on unreadable files.
std::uint64_t file_checksum(const std::string& path);

} // namespace cbd
