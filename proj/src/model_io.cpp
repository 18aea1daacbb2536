#include "cbd/model_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "cbd/hash.hpp"

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts need byte swapping");
static_assert(sizeof(float) == 4, "model files store IEEE-754 binary32");

namespace cbd {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string tensor_file_name(const std::string& param_name) {
    return param_name + ".bin";
}

std::vector<char> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    return bytes;
}

} // namespace

void save_model(const ModelBundle& bundle, const Vocabulary& vocab, const std::string& dir) {
    if (vocab.checksum() != bundle.vocab_checksum)
        throw std::invalid_argument("vocabulary does not match the bundle checksum");
    fs::create_directories(dir);

    ordered_json manifest;
    manifest["format_version"] = 1;
    manifest["architecture"] = to_string(bundle.arch);
    manifest["classes"] = bundle.classes;
    manifest["l_max"] = bundle.l_max;
    manifest["vocab_size"] = vocab.size();
    manifest["embedding_dim"] = bundle.embedding_dim;
    manifest["vocab_checksum"] = to_hex64(bundle.vocab_checksum);
    manifest["hyperparams"] = {{"epochs", bundle.hp.epochs},
                               {"batch_size", bundle.hp.batch_size},
                               {"lr", bundle.hp.adam.lr},
                               {"beta1", bundle.hp.adam.beta1},
                               {"beta2", bundle.hp.adam.beta2},
                               {"eps", bundle.hp.adam.eps},
                               {"dropout_embed", bundle.hp.dropout_embed},
                               {"dropout_final", bundle.hp.dropout_final},
                               {"hidden_size", bundle.hp.hidden_size},
                               {"filters", bundle.hp.filters},
                               {"kernel_width", bundle.hp.kernel_width}};
    manifest["provenance"] = {{"dataset", bundle.dataset_tag},
                              {"seed", bundle.seed},
                              {"split_mode", bundle.split_mode}};

    ordered_json tensors = ordered_json::array();
    for (const auto& p : bundle.params) {
        const auto file = tensor_file_name(p.name);
        const auto* bytes = reinterpret_cast<const char*>(p.value.data.data());
        const std::size_t n_bytes = p.value.numel() * sizeof(float);
        std::ofstream out(fs::path(dir) / file, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write tensor file " + file);
        out.write(bytes, std::streamsize(n_bytes));
        if (!out) throw std::runtime_error("short write on tensor file " + file);
        tensors.push_back({{"name", p.name},
                           {"shape", p.value.shape},
                           {"file", file},
                           {"bytes", n_bytes},
                           {"fnv1a64", to_hex64(fnv1a64(bytes, n_bytes))}});
    }
    manifest["tensors"] = std::move(tensors);

    std::ofstream mout(fs::path(dir) / "manifest.json");
    if (!mout) throw std::runtime_error("cannot write manifest.json in " + dir);
    mout << manifest.dump(2) << '\n';

    save_vocab(vocab, (fs::path(dir) / "vocab.txt").string());
}

LoadedModel load_model(const std::string& dir) {
    const fs::path root(dir);
    ordered_json manifest;
    {
        std::ifstream in(root / "manifest.json");
        if (!in) throw std::runtime_error("cannot open manifest.json in " + dir);
        try {
            in >> manifest;
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("manifest.json is not valid JSON: " +
                                     std::string(e.what()));
        }
    }
    if (manifest.value("format_version", 0) != 1)
        throw std::runtime_error("unsupported model format version");

    LoadedModel loaded;
    auto& bundle = loaded.bundle;
    bundle.arch = architecture_from_string(manifest.at("architecture").get<std::string>());
    bundle.classes = manifest.at("classes").get<std::vector<std::string>>();
    bundle.l_max = manifest.at("l_max").get<std::size_t>();
    bundle.embedding_dim = manifest.at("embedding_dim").get<std::size_t>();
    bundle.vocab_checksum =
        std::stoull(manifest.at("vocab_checksum").get<std::string>(), nullptr, 16);
    const auto& hp = manifest.at("hyperparams");
    bundle.hp.epochs = hp.at("epochs").get<std::size_t>();
    bundle.hp.batch_size = hp.at("batch_size").get<std::size_t>();
    bundle.hp.adam.lr = hp.at("lr").get<double>();
    bundle.hp.adam.beta1 = hp.at("beta1").get<double>();
    bundle.hp.adam.beta2 = hp.at("beta2").get<double>();
    bundle.hp.adam.eps = hp.at("eps").get<double>();
    bundle.hp.dropout_embed = hp.at("dropout_embed").get<double>();
    bundle.hp.dropout_final = hp.at("dropout_final").get<double>();
    bundle.hp.hidden_size = hp.at("hidden_size").get<std::size_t>();
    bundle.hp.filters = hp.at("filters").get<std::size_t>();
    bundle.hp.kernel_width = hp.at("kernel_width").get<std::size_t>();
    const auto& prov = manifest.at("provenance");
    bundle.dataset_tag = prov.at("dataset").get<std::string>();
    bundle.seed = prov.at("seed").get<std::uint64_t>();
    bundle.split_mode = prov.at("split_mode").get<std::string>();

    const std::size_t vocab_size = manifest.at("vocab_size").get<std::size_t>();
    const auto schema = param_schema(bundle.arch, vocab_size, bundle.embedding_dim,
                                     bundle.classes.size(), bundle.hp);
    const auto& tensors = manifest.at("tensors");
    if (tensors.size() != schema.size())
        throw std::runtime_error("manifest lists " + std::to_string(tensors.size()) +
                                 " tensors but architecture " + to_string(bundle.arch) +
                                 " has " + std::to_string(schema.size()));
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const auto& [name, shape] = schema[i];
        const auto& entry = tensors[i];
        if (entry.at("name").get<std::string>() != name)
            throw std::runtime_error("tensor " + std::to_string(i) + " is '" +
                                     entry.at("name").get<std::string>() + "', expected '" +
                                     name + "' for architecture " + to_string(bundle.arch));
        if (entry.at("shape").get<std::vector<std::size_t>>() != shape)
            throw std::runtime_error("tensor '" + name + "' has an unexpected shape");
        auto& p = bundle.params.add(name, shape);
        const auto bytes = read_file(root / entry.at("file").get<std::string>());
        const std::size_t expected = p.value.numel() * sizeof(float);
        if (bytes.size() != expected)
            throw std::runtime_error("tensor '" + name + "' file holds " +
                                     std::to_string(bytes.size()) + " bytes, expected " +
                                     std::to_string(expected));
        const auto checksum = to_hex64(fnv1a64(bytes.data(), bytes.size()));
        if (checksum != entry.at("fnv1a64").get<std::string>())
            throw std::runtime_error("tensor '" + name + "' fails its checksum");
        std::memcpy(p.value.data.data(), bytes.data(), bytes.size());
    }

    loaded.vocab = load_vocab((root / "vocab.txt").string());
    if (loaded.vocab.size() != vocab_size)
        throw std::runtime_error("vocab.txt size does not match the manifest");
    if (loaded.vocab.checksum() != bundle.vocab_checksum)
        throw std::runtime_error("vocab.txt fails the manifest checksum");
    return loaded;
}

} // namespace cbd
