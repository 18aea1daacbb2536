#include "cbd/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "cbd/hash.hpp"
#include "cbd/transfer.hpp"

namespace cbd {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// Collects violations; every reader returns a usable default so validation
// can keep going and report the full list.
struct Checker {
    std::vector<std::string> violations;

    void fail(const std::string& message) { violations.push_back(message); }

    void check_keys(const json& object, const std::set<std::string>& allowed,
                    const std::string& where) {
        for (const auto& [key, value] : object.items())
            if (!allowed.count(key)) fail(where + ": unknown key '" + key + "'");
    }

    std::string str(const json& object, const std::string& key, const std::string& where,
                    const std::string& fallback = "") {
        if (!object.contains(key)) return fallback;
        if (!object[key].is_string()) {
            fail(where + "." + key + ": expected a string");
            return fallback;
        }
        return object[key].get<std::string>();
    }

    std::uint64_t u64(const json& object, const std::string& key, const std::string& where,
                      std::uint64_t fallback) {
        if (!object.contains(key)) return fallback;
        const json& v = object[key];
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
            return std::uint64_t(v.get<std::int64_t>());
        fail(where + "." + key + ": expected a non-negative integer");
        return fallback;
    }

    double num(const json& object, const std::string& key, const std::string& where,
               double fallback) {
        if (!object.contains(key)) return fallback;
        if (!object[key].is_number()) {
            fail(where + "." + key + ": expected a number");
            return fallback;
        }
        return object[key].get<double>();
    }
};

std::string resolve(const std::string& path, const std::string& base_dir) {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return p.lexically_normal().generic_string();
    return (std::filesystem::path(base_dir) / p).lexically_normal().generic_string();
}

void require_file(Checker& check, const std::string& path, const std::string& what) {
    if (path.empty()) return;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        check.fail(what + ": file not found: " + path);
}

const std::set<std::string> kApproaches = {"complete", "feature", "model"};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> all)
    : std::runtime_error("invalid config:\n  " + join(all, "\n  ")),
      violations(std::move(all)) {}

std::uint64_t file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string bytes = buffer.str();
    return fnv1a64(bytes.data(), bytes.size());
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
    Checker check;
    json root = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
    if (root.is_discarded() || !root.is_object()) {
        throw ConfigError({root.is_discarded() ? "not valid JSON"
                                               : "top level must be a JSON object"});
    }

    ExperimentConfig config;
    check.check_keys(root,
                     {"output_dir", "seed", "mode", "k", "jobs", "stopwords", "oversample",
                      "architectures", "embeddings", "dimensions", "hyperparams", "datasets",
                      "transfers"},
                     "config");

    config.output_dir = resolve(check.str(root, "output_dir", "config", config.output_dir),
                                base_dir);
    config.seed = check.u64(root, "seed", "config", config.seed);
    const std::string mode = check.str(root, "mode", "config", "strict");
    try {
        config.mode = split_mode_from_string(mode);
    } catch (const std::exception&) {
        check.fail("config.mode: expected \"strict\" or \"fidelity\", got \"" + mode + "\"");
    }
    config.k = std::size_t(check.u64(root, "k", "config", config.k));
    if (config.k < 2) check.fail("config.k: cross-validation needs k >= 2");
    config.jobs = std::size_t(check.u64(root, "jobs", "config", config.jobs));
    config.stopwords_path = resolve(check.str(root, "stopwords", "config"), base_dir);
    require_file(check, config.stopwords_path, "config.stopwords");

    if (root.contains("oversample")) {
        const json& over = root["oversample"];
        if (!over.is_object()) {
            check.fail("config.oversample: expected an object");
        } else {
            check.check_keys(over, {"class", "factor"}, "config.oversample");
            config.oversample_class =
                check.str(over, "class", "config.oversample", config.oversample_class);
            config.oversample_factor = std::size_t(
                check.u64(over, "factor", "config.oversample", config.oversample_factor));
            if (config.oversample_factor < 1)
                check.fail("config.oversample.factor: must be at least 1");
        }
    }

    if (root.contains("architectures")) {
        if (!root["architectures"].is_array()) {
            check.fail("config.architectures: expected an array of names");
        } else {
            config.architectures.clear();
            for (const auto& entry : root["architectures"]) {
                if (!entry.is_string()) {
                    check.fail("config.architectures: entries must be strings");
                    continue;
                }
                config.architectures.push_back(entry.get<std::string>());
            }
        }
    }
    if (config.architectures.empty()) check.fail("config.architectures: must not be empty");
    std::unordered_set<std::string> seen_arch;
    for (const auto& name : config.architectures) {
        try {
            architecture_from_string(name);
        } catch (const std::exception&) {
            check.fail("config.architectures: unknown architecture \"" + name + "\"");
        }
        if (!seen_arch.insert(name).second)
            check.fail("config.architectures: duplicate \"" + name + "\"");
    }

    if (root.contains("embeddings")) {
        if (!root["embeddings"].is_array()) {
            check.fail("config.embeddings: expected an array of objects");
        } else {
            config.embeddings.clear();
            std::size_t index = 0;
            for (const auto& entry : root["embeddings"]) {
                const std::string where = "config.embeddings[" + std::to_string(index++) + "]";
                if (!entry.is_object()) {
                    check.fail(where + ": expected an object");
                    continue;
                }
                check.check_keys(entry, {"name", "path"}, where);
                EmbeddingSpec spec;
                spec.name = check.str(entry, "name", where);
                spec.path = resolve(check.str(entry, "path", where), base_dir);
                if (spec.name.empty()) check.fail(where + ".name: must not be empty");
                if (spec.name == "random") {
                    if (!spec.path.empty())
                        check.fail(where + ": \"random\" takes no vector file");
                } else {
                    if (spec.path.empty())
                        check.fail(where + ".path: pretrained embedding needs a vector file");
                    require_file(check, spec.path, where + ".path");
                }
                config.embeddings.push_back(std::move(spec));
            }
        }
    }
    if (config.embeddings.empty()) check.fail("config.embeddings: must not be empty");
    std::unordered_set<std::string> seen_emb;
    for (const auto& spec : config.embeddings)
        if (!spec.name.empty() && !seen_emb.insert(spec.name).second)
            check.fail("config.embeddings: duplicate name \"" + spec.name + "\"");

    if (root.contains("dimensions")) {
        if (!root["dimensions"].is_array()) {
            check.fail("config.dimensions: expected an array of integers");
        } else {
            config.dimensions.clear();
            for (const auto& entry : root["dimensions"]) {
                if (!entry.is_number_unsigned() || entry.get<std::uint64_t>() == 0) {
                    check.fail("config.dimensions: entries must be positive integers");
                    continue;
                }
                config.dimensions.push_back(entry.get<std::size_t>());
            }
        }
    }
    if (config.dimensions.empty()) check.fail("config.dimensions: must not be empty");
    std::unordered_set<std::size_t> seen_dim;
    for (std::size_t d : config.dimensions)
        if (!seen_dim.insert(d).second)
            check.fail("config.dimensions: duplicate dimension " + std::to_string(d));

    if (root.contains("hyperparams")) {
        const json& hp = root["hyperparams"];
        if (!hp.is_object()) {
            check.fail("config.hyperparams: expected an object");
        } else {
            check.check_keys(hp,
                             {"epochs", "batch_size", "learning_rate", "hidden_size",
                              "filters", "kernel_width", "dropout_embed", "dropout_final"},
                             "config.hyperparams");
            const std::string where = "config.hyperparams";
            config.hp.epochs = std::size_t(check.u64(hp, "epochs", where, config.hp.epochs));
            config.hp.batch_size =
                std::size_t(check.u64(hp, "batch_size", where, config.hp.batch_size));
            config.hp.adam.lr = check.num(hp, "learning_rate", where, config.hp.adam.lr);
            config.hp.hidden_size =
                std::size_t(check.u64(hp, "hidden_size", where, config.hp.hidden_size));
            config.hp.filters = std::size_t(check.u64(hp, "filters", where, config.hp.filters));
            config.hp.kernel_width =
                std::size_t(check.u64(hp, "kernel_width", where, config.hp.kernel_width));
            config.hp.dropout_embed =
                check.num(hp, "dropout_embed", where, config.hp.dropout_embed);
            config.hp.dropout_final =
                check.num(hp, "dropout_final", where, config.hp.dropout_final);
            if (config.hp.epochs < 1) check.fail(where + ".epochs: must be at least 1");
            if (config.hp.batch_size < 1) check.fail(where + ".batch_size: must be at least 1");
            if (config.hp.adam.lr <= 0) check.fail(where + ".learning_rate: must be positive");
            if (config.hp.hidden_size < 1)
                check.fail(where + ".hidden_size: must be at least 1");
            if (config.hp.filters < 1) check.fail(where + ".filters: must be at least 1");
            if (config.hp.kernel_width < 1)
                check.fail(where + ".kernel_width: must be at least 1");
            for (const char* key : {"dropout_embed", "dropout_final"}) {
                const double rate = std::string(key) == "dropout_embed"
                                        ? config.hp.dropout_embed
                                        : config.hp.dropout_final;
                if (rate < 0.0 || rate >= 1.0)
                    check.fail(where + "." + key + ": must be in [0, 1)");
            }
        }
    }

    if (!root.contains("datasets") || !root["datasets"].is_array() ||
        root["datasets"].empty()) {
        check.fail("config.datasets: at least one dataset is required");
    } else {
        std::unordered_set<std::string> seen_name;
        std::size_t index = 0;
        for (const auto& entry : root["datasets"]) {
            const std::string where = "config.datasets[" + std::to_string(index++) + "]";
            if (!entry.is_object()) {
                check.fail(where + ": expected an object");
                continue;
            }
            check.check_keys(entry,
                             {"name", "path", "classes", "text_column", "label_column",
                              "id_column", "oversample_class"},
                             where);
            DatasetSpec spec;
            spec.name = check.str(entry, "name", where);
            spec.path = resolve(check.str(entry, "path", where), base_dir);
            spec.schema.text_column =
                check.str(entry, "text_column", where, spec.schema.text_column);
            spec.schema.label_column =
                check.str(entry, "label_column", where, spec.schema.label_column);
            spec.schema.id_column = check.str(entry, "id_column", where);
            spec.oversample_class =
                check.str(entry, "oversample_class", where, config.oversample_class);
            if (spec.name.empty()) check.fail(where + ".name: must not be empty");
            if (!seen_name.insert(spec.name).second)
                check.fail(where + ".name: duplicate dataset \"" + spec.name + "\"");
            if (spec.path.empty())
                check.fail(where + ".path: required");
            else
                require_file(check, spec.path, where + ".path");
            if (!entry.contains("classes") || !entry["classes"].is_array()) {
                check.fail(where + ".classes: expected an array of class names");
            } else {
                std::unordered_set<std::string> seen_class;
                for (const auto& cls : entry["classes"]) {
                    if (!cls.is_string() || cls.get<std::string>().empty()) {
                        check.fail(where + ".classes: entries must be non-empty strings");
                        continue;
                    }
                    spec.classes.push_back(cls.get<std::string>());
                    if (!seen_class.insert(spec.classes.back()).second)
                        check.fail(where + ".classes: duplicate \"" + spec.classes.back() +
                                   "\"");
                }
                if (spec.classes.size() < 2)
                    check.fail(where + ".classes: need at least two classes");
            }
            if (config.oversample_factor > 1 && !spec.classes.empty() &&
                std::find(spec.classes.begin(), spec.classes.end(), spec.oversample_class) ==
                    spec.classes.end())
                check.fail(where + ": oversample class \"" + spec.oversample_class +
                           "\" is not one of the dataset's classes");
            config.datasets.push_back(std::move(spec));
        }
    }

    auto dataset_named = [&](const std::string& name) -> const DatasetSpec* {
        for (const auto& spec : config.datasets)
            if (spec.name == name) return &spec;
        return nullptr;
    };

    if (root.contains("transfers")) {
        if (!root["transfers"].is_array()) {
            check.fail("config.transfers: expected an array of objects");
        } else {
            std::size_t index = 0;
            for (const auto& entry : root["transfers"]) {
                const std::string where = "config.transfers[" + std::to_string(index++) + "]";
                if (!entry.is_object()) {
                    check.fail(where + ": expected an object");
                    continue;
                }
                check.check_keys(
                    entry, {"source", "target", "approaches", "architecture", "embedding",
                            "dimension"},
                    where);
                TransferSpec spec;
                spec.source = check.str(entry, "source", where);
                spec.target = check.str(entry, "target", where);
                spec.architecture =
                    check.str(entry, "architecture", where, spec.architecture);
                spec.embedding = check.str(entry, "embedding", where, spec.embedding);
                spec.dimension =
                    std::size_t(check.u64(entry, "dimension", where, spec.dimension));

                const DatasetSpec* source = dataset_named(spec.source);
                const DatasetSpec* target = dataset_named(spec.target);
                if (!source)
                    check.fail(where + ".source: no dataset named \"" + spec.source + "\"");
                if (!target)
                    check.fail(where + ".target: no dataset named \"" + spec.target + "\"");
                try {
                    architecture_from_string(spec.architecture);
                } catch (const std::exception&) {
                    check.fail(where + ".architecture: unknown architecture \"" +
                               spec.architecture + "\"");
                }
                if (!seen_emb.count(spec.embedding))
                    check.fail(where + ".embedding: no embedding named \"" + spec.embedding +
                               "\"");
                if (entry.contains("approaches") && entry["approaches"].is_array()) {
                    for (const auto& a : entry["approaches"]) {
                        if (!a.is_string() || !kApproaches.count(a.get<std::string>())) {
                            check.fail(where +
                                       ".approaches: expected \"complete\", \"feature\", or "
                                       "\"model\"");
                            continue;
                        }
                        spec.approaches.push_back(a.get<std::string>());
                    }
                } else {
                    check.fail(where + ".approaches: required array");
                }
                if (spec.approaches.empty())
                    check.fail(where + ".approaches: must not be empty");
                if (source && target &&
                    std::find(spec.approaches.begin(), spec.approaches.end(), "complete") !=
                        spec.approaches.end()) {
                    try {
                        class_mapping(source->classes, target->classes);
                    } catch (const std::exception& e) {
                        check.fail(where + ": complete transfer impossible: " + e.what());
                    }
                }
                if (spec.dimension == 0 && !config.dimensions.empty())
                    spec.dimension = config.dimensions.front();
                config.transfers.push_back(std::move(spec));
            }
        }
    }

    if (!check.violations.empty()) throw ConfigError(std::move(check.violations));
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot read config file: " + path});
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    ExperimentConfig config =
        parse_config(text, std::filesystem::path(path).parent_path().generic_string());
    config.source_checksum = fnv1a64(text.data(), text.size());
    return config;
}

std::string normalized_config_json(const ExperimentConfig& config) {
    ordered_json root;
    root["output_dir"] = config.output_dir;
    root["seed"] = config.seed;
    root["mode"] = to_string(config.mode);
    root["k"] = config.k;
    root["jobs"] = config.jobs;
    root["stopwords"] = config.stopwords_path;
    root["oversample"] = {{"class", config.oversample_class},
                          {"factor", config.oversample_factor}};
    root["architectures"] = config.architectures;
    root["embeddings"] = ordered_json::array();
    for (const auto& spec : config.embeddings) {
        ordered_json entry;
        entry["name"] = spec.name;
        entry["path"] = spec.path;
        root["embeddings"].push_back(entry);
    }
    root["dimensions"] = config.dimensions;
    root["hyperparams"] = {{"epochs", config.hp.epochs},
                           {"batch_size", config.hp.batch_size},
                           {"learning_rate", config.hp.adam.lr},
                           {"hidden_size", config.hp.hidden_size},
                           {"filters", config.hp.filters},
                           {"kernel_width", config.hp.kernel_width},
                           {"dropout_embed", config.hp.dropout_embed},
                           {"dropout_final", config.hp.dropout_final}};
    root["datasets"] = ordered_json::array();
    for (const auto& spec : config.datasets) {
        ordered_json entry;
        entry["name"] = spec.name;
        entry["path"] = spec.path;
        entry["classes"] = spec.classes;
        entry["text_column"] = spec.schema.text_column;
        entry["label_column"] = spec.schema.label_column;
        entry["id_column"] = spec.schema.id_column;
        entry["oversample_class"] = spec.oversample_class;
        root["datasets"].push_back(entry);
    }
    root["transfers"] = ordered_json::array();
    for (const auto& spec : config.transfers) {
        ordered_json entry;
        entry["source"] = spec.source;
        entry["target"] = spec.target;
        entry["approaches"] = spec.approaches;
        entry["architecture"] = spec.architecture;
        entry["embedding"] = spec.embedding;
        entry["dimension"] = spec.dimension;
        root["transfers"].push_back(entry);
    }
    return root.dump(2) + "\n";
}

} // namespace cbd
