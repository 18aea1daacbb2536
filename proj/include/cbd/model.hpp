#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbd/adam.hpp"
#include "cbd/attention.hpp"
#include "cbd/datasets.hpp"
#include "cbd/embeddings.hpp"
#include "cbd/layers.hpp"
#include "cbd/lstm.hpp"
#include "cbd/params.hpp"
#include "cbd/rng.hpp"
#include "cbd/tensor.hpp"
#include "cbd/text.hpp"

namespace cbd {

enum class Architecture { Cnn, Lstm, Blstm, BlstmAttn };

std::string to_string(Architecture arch);
Architecture architecture_from_string(const std::string& name);

struct Hyperparams {
    std::size_t epochs = 10;
    std::size_t batch_size = 128;
    AdamConfig adam;
    double dropout_embed = 0.25;
    double dropout_final = 0.5;
    std::size_t hidden_size = 64;  // recurrent architectures
    std::size_t filters = 128;     // CNN
    std::size_t kernel_width = 3;  // CNN
};

// Parameter names and shapes an architecture must carry, in insertion order.
// Shared by model construction and serialization so the two cannot drift.
std::vector<std::pair<std::string, std::vector<std::size_t>>>
param_schema(Architecture arch, std::size_t vocab_size, std::size_t embedding_dim,
             std::size_t n_classes, const Hyperparams& hp);

template <typename T>
struct ModelBundleT {
    Architecture arch = Architecture::Cnn;
    LayerParamsT<T> params; // "embedding.E" first, then layers, then dense
    std::vector<std::string> classes;
    std::size_t l_max = 0;
    std::size_t embedding_dim = 0;
    std::uint64_t vocab_checksum = 0;
    Hyperparams hp;

    // training provenance, recorded in the manifest
    std::string dataset_tag;
    std::uint64_t seed = 0;
    std::string split_mode;
};

using ModelBundle = ModelBundleT<float>;

struct TrainHistory {
    std::vector<double> epoch_loss; // mean per-example training loss
    double seconds = 0.0;
};

struct EncodedBatch {
    std::vector<std::vector<std::int32_t>> sequences; // each exactly l_max long
    std::vector<std::size_t> targets;                 // class indices; empty at predict
    std::size_t l_max = 0;
    std::uint64_t vocab_checksum = 0;
};

EncodedBatch encode_corpus(const LabeledCorpus& corpus, const Vocabulary& vocab,
                           std::size_t l_max, const StopwordSet& stopwords,
                           bool with_targets = true);

// Non-embedding parameters are initialized from `seed` alone, so two builds
// sharing a seed agree on every layer weight even when their embedding
// matrices differ (the transfer paths rely on this).
template <typename T>
ModelBundleT<T> build_model(Architecture arch, const Vocabulary& vocab,
                            const EmbeddingMatrixT<T>& embedding,
                            std::vector<std::string> classes, std::size_t l_max,
                            const Hyperparams& hp, std::uint64_t seed);

template <typename T>
TrainHistory train(ModelBundleT<T>& bundle, const EncodedBatch& batch);

template <typename T>
std::vector<std::vector<T>> predict(ModelBundleT<T>& bundle, const EncodedBatch& batch);

// One forward/backward pipeline instance over a bundle. predict/train use it
// internally; gradient-check code drives it directly.
template <typename T>
class NetT {
public:
    explicit NetT(ModelBundleT<T>& bundle);

    // probability vector over classes for one encoded sequence
    std::vector<T> forward(const std::vector<std::int32_t>& seq, Mode mode, Rng& rng);
    // accumulates parameter gradients; masks the PAD embedding row
    void backward(const std::vector<T>& dlogits, const std::vector<std::int32_t>& seq);

private:
    ModelBundleT<T>& bundle_;
    DropoutT<T> drop_embed_;
    DropoutT<T> drop_final_;
    std::optional<Conv1dMaxPoolT<T>> conv_;
    std::optional<LstmLayerT<T>> lstm_;
    std::optional<BlstmLayerT<T>> blstm_;
    std::optional<AttentionLayerT<T>> attn_;
    std::optional<DenseSoftmaxT<T>> dense_;

    TensorT<T> embedded_;
    TensorT<T> dropped_;
    TensorT<T> features_;
    TensorT<T> features_dropped_;
    TensorT<T> rnn_out_;
};

using Net = NetT<float>;

} // namespace cbd
