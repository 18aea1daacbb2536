#include "cbd/model.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cbd {

std::string to_string(Architecture arch) {
    switch (arch) {
        case Architecture::Cnn: return "CNN";
        case Architecture::Lstm: return "LSTM";
        case Architecture::Blstm: return "BLSTM";
        case Architecture::BlstmAttn: return "BLSTM_ATTN";
    }
    throw std::logic_error("unhandled architecture");
}

Architecture architecture_from_string(const std::string& name) {
    if (name == "CNN") return Architecture::Cnn;
    if (name == "LSTM") return Architecture::Lstm;
    if (name == "BLSTM") return Architecture::Blstm;
    if (name == "BLSTM_ATTN") return Architecture::BlstmAttn;
    throw std::invalid_argument("unknown architecture '" + name +
                                "' (expected CNN, LSTM, BLSTM, or BLSTM_ATTN)");
}

std::vector<std::pair<std::string, std::vector<std::size_t>>>
param_schema(Architecture arch, std::size_t vocab_size, std::size_t embedding_dim,
             std::size_t n_classes, const Hyperparams& hp) {
    std::vector<std::pair<std::string, std::vector<std::size_t>>> schema;
    schema.emplace_back("embedding.E", std::vector<std::size_t>{vocab_size, embedding_dim});

    const std::size_t h = hp.hidden_size;
    auto lstm_block = [&](const std::string& prefix) {
        for (char gate : std::string("ifog")) {
            schema.emplace_back(prefix + ".W_" + gate,
                                std::vector<std::size_t>{embedding_dim, h});
            schema.emplace_back(prefix + ".U_" + gate, std::vector<std::size_t>{h, h});
            schema.emplace_back(prefix + ".b_" + gate, std::vector<std::size_t>{h});
        }
    };

    std::size_t feature_width = 0;
    switch (arch) {
        case Architecture::Cnn:
            schema.emplace_back("conv.filters", std::vector<std::size_t>{
                                                    hp.filters, hp.kernel_width, embedding_dim});
            schema.emplace_back("conv.bias", std::vector<std::size_t>{hp.filters});
            feature_width = hp.filters;
            break;
        case Architecture::Lstm:
            lstm_block("lstm");
            feature_width = h;
            break;
        case Architecture::Blstm:
            lstm_block("fwd");
            lstm_block("bwd");
            feature_width = 2 * h;
            break;
        case Architecture::BlstmAttn:
            lstm_block("fwd");
            lstm_block("bwd");
            schema.emplace_back("attention.w", std::vector<std::size_t>{2 * h});
            feature_width = 2 * h;
            break;
    }
    schema.emplace_back("dense.W", std::vector<std::size_t>{n_classes, feature_width});
    schema.emplace_back("dense.b", std::vector<std::size_t>{n_classes});
    return schema;
}

EncodedBatch encode_corpus(const LabeledCorpus& corpus, const Vocabulary& vocab,
                           std::size_t l_max, const StopwordSet& stopwords,
                           bool with_targets) {
    EncodedBatch batch;
    batch.l_max = l_max;
    batch.vocab_checksum = vocab.checksum();
    batch.sequences.reserve(corpus.posts.size());
    if (with_targets) batch.targets.reserve(corpus.posts.size());
    for (const auto& post : corpus.posts) {
        batch.sequences.push_back(encode(preprocess(post.text, stopwords), vocab, l_max).indices);
        if (with_targets) batch.targets.push_back(corpus.class_index(post.label));
    }
    return batch;
}

template <typename T>
ModelBundleT<T> build_model(Architecture arch, const Vocabulary& vocab,
                            const EmbeddingMatrixT<T>& embedding,
                            std::vector<std::string> classes, std::size_t l_max,
                            const Hyperparams& hp, std::uint64_t seed) {
    if (embedding.matrix.shape.size() != 2 || embedding.matrix.shape[0] != vocab.size())
        throw std::invalid_argument("embedding matrix is not bound to this vocabulary");
    if (classes.size() < 2) throw std::invalid_argument("need at least two classes");
    if (l_max < 1) throw std::invalid_argument("sequence length must be at least 1");
    if (hp.hidden_size < 1 || hp.filters < 1 || hp.kernel_width < 1)
        throw std::invalid_argument("layer sizes must be at least 1");
    if (arch == Architecture::Cnn && l_max < hp.kernel_width)
        throw std::invalid_argument("sequence length " + std::to_string(l_max) +
                                    " is shorter than the convolution kernel " +
                                    std::to_string(hp.kernel_width));

    ModelBundleT<T> bundle;
    bundle.arch = arch;
    bundle.classes = std::move(classes);
    bundle.l_max = l_max;
    bundle.embedding_dim = embedding.matrix.shape[1];
    bundle.vocab_checksum = vocab.checksum();
    bundle.hp = hp;
    bundle.seed = seed;

    Rng rng(derive_seed(seed, "init"));
    const auto schema = param_schema(arch, vocab.size(), bundle.embedding_dim,
                                     bundle.classes.size(), hp);
    for (const auto& [name, shape] : schema) {
        auto& p = bundle.params.add(name, shape);
        if (name == "embedding.E") {
            p.value = embedding.matrix;
        } else if (name == "conv.filters") {
            glorot_uniform(p.value, shape[1] * shape[2], shape[0], rng);
        } else if (name == "attention.w") {
            glorot_uniform(p.value, shape[0], 1, rng);
        } else if (name == "dense.W") {
            glorot_uniform(p.value, shape[1], shape[0], rng);
        } else if (name.find(".W_") != std::string::npos ||
                   name.find(".U_") != std::string::npos) {
            glorot_uniform(p.value, shape[0], shape[1], rng);
        }
        // biases keep their zero initialization
    }
    return bundle;
}

template <typename T>
NetT<T>::NetT(ModelBundleT<T>& bundle)
    : bundle_(bundle),
      drop_embed_(bundle.hp.dropout_embed),
      drop_final_(bundle.hp.dropout_final) {
    switch (bundle.arch) {
        case Architecture::Cnn:
            conv_.emplace(bundle.params, "conv.filters", "conv.bias");
            break;
        case Architecture::Lstm:
            lstm_.emplace(bundle.params, "lstm", Direction::Forward);
            break;
        case Architecture::Blstm:
            blstm_.emplace(bundle.params, "fwd", "bwd");
            break;
        case Architecture::BlstmAttn:
            blstm_.emplace(bundle.params, "fwd", "bwd");
            attn_.emplace(bundle.params, "attention.w");
            break;
    }
    dense_.emplace(bundle.params, "dense.W", "dense.b");
}

template <typename T>
std::vector<T> NetT<T>::forward(const std::vector<std::int32_t>& seq, Mode mode, Rng& rng) {
    embedded_ = embedding_forward(seq, bundle_.params.at("embedding.E").value);
    dropped_ = drop_embed_.forward(embedded_, mode, rng);

    switch (bundle_.arch) {
        case Architecture::Cnn:
            features_ = TensorT<T>({bundle_.hp.filters}, conv_->forward(dropped_));
            break;
        case Architecture::Lstm: {
            rnn_out_ = lstm_->forward(dropped_);
            const std::size_t Tlen = rnn_out_.shape[0], h = rnn_out_.shape[1];
            features_ = TensorT<T>({h});
            for (std::size_t q = 0; q < h; ++q) features_.data[q] = rnn_out_.at2(Tlen - 1, q);
            break;
        }
        case Architecture::Blstm: {
            rnn_out_ = blstm_->forward(dropped_);
            const std::size_t Tlen = rnn_out_.shape[0], h = rnn_out_.shape[1] / 2;
            // final forward state plus final backward state (the latter lives
            // at original position 0 after re-reversal)
            features_ = TensorT<T>({2 * h});
            for (std::size_t q = 0; q < h; ++q) {
                features_.data[q] = rnn_out_.at2(Tlen - 1, q);
                features_.data[h + q] = rnn_out_.at2(0, h + q);
            }
            break;
        }
        case Architecture::BlstmAttn: {
            rnn_out_ = blstm_->forward(dropped_);
            features_ = TensorT<T>({rnn_out_.shape[1]}, attn_->forward(rnn_out_));
            break;
        }
    }

    features_dropped_ = drop_final_.forward(features_, mode, rng);
    return dense_->forward(features_dropped_.data);
}

template <typename T>
void NetT<T>::backward(const std::vector<T>& dlogits, const std::vector<std::int32_t>& seq) {
    const TensorT<T> dfeat_dropped(features_dropped_.shape, dense_->backward(dlogits));
    const TensorT<T> dfeat = drop_final_.backward(dfeat_dropped);

    TensorT<T> dembedded;
    switch (bundle_.arch) {
        case Architecture::Cnn:
            dembedded = conv_->backward(dfeat.data);
            break;
        case Architecture::Lstm: {
            TensorT<T> dH(rnn_out_.shape);
            const std::size_t Tlen = dH.shape[0], h = dH.shape[1];
            for (std::size_t q = 0; q < h; ++q) dH.at2(Tlen - 1, q) = dfeat.data[q];
            dembedded = lstm_->backward(dH);
            break;
        }
        case Architecture::Blstm: {
            TensorT<T> dH(rnn_out_.shape);
            const std::size_t Tlen = dH.shape[0], h = dH.shape[1] / 2;
            for (std::size_t q = 0; q < h; ++q) {
                dH.at2(Tlen - 1, q) = dfeat.data[q];
                dH.at2(0, h + q) = dfeat.data[h + q];
            }
            dembedded = blstm_->backward(dH);
            break;
        }
        case Architecture::BlstmAttn:
            dembedded = blstm_->backward(attn_->backward(dfeat.data));
            break;
    }

    const TensorT<T> dx = drop_embed_.backward(dembedded);
    embedding_backward(seq, dx, bundle_.params.at("embedding.E").grad);
}

namespace {

template <typename T>
void validate_batch(const ModelBundleT<T>& bundle, const EncodedBatch& batch,
                    bool need_targets) {
    if (batch.vocab_checksum != bundle.vocab_checksum)
        throw std::runtime_error("vocabulary checksum mismatch between model and batch");
    if (batch.l_max != bundle.l_max)
        throw std::runtime_error("sequence length mismatch: batch " +
                                 std::to_string(batch.l_max) + ", model " +
                                 std::to_string(bundle.l_max));
    for (const auto& seq : batch.sequences)
        if (seq.size() != bundle.l_max)
            throw std::runtime_error("encoded sequence length differs from model L_max");
    if (need_targets && batch.targets.size() != batch.sequences.size())
        throw std::invalid_argument("targets do not pair up with sequences");
}

} // namespace

template <typename T>
TrainHistory train(ModelBundleT<T>& bundle, const EncodedBatch& batch) {
    validate_batch(bundle, batch, true);
    if (batch.sequences.empty()) throw std::invalid_argument("no training data");

    const auto start_time = std::chrono::steady_clock::now();
    Rng rng(derive_seed(bundle.seed, "train"));
    NetT<T> net(bundle);
    AdamStateT<T> adam(bundle.params);
    auto& embedding = bundle.params.at("embedding.E");
    const std::size_t d = embedding.value.shape[1];
    const std::size_t n = batch.sequences.size();

    TrainHistory history;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < bundle.hp.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0, batch_ix = 0; start < n;
             start += bundle.hp.batch_size, ++batch_ix) {
            const std::size_t m = std::min(bundle.hp.batch_size, n - start);
            bundle.params.zero_grads();
            double batch_loss = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                const std::size_t i = order[start + j];
                const auto probs = net.forward(batch.sequences[i], Mode::Train, rng);
                batch_loss += cross_entropy_loss(probs, batch.targets[i]);
                net.backward(cross_entropy_dlogits(probs, batch.targets[i], T(1.0 / double(m))),
                             batch.sequences[i]);
            }
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("non-finite training loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batch_ix));
            epoch_loss += batch_loss;
            // PAD row stays frozen: no gradient, and Adam’s zero moments keep
            // the update identically zero.
            for (std::size_t c = 0; c < d; ++c) embedding.grad.data[c] = T(0);
            adam_step(bundle.params, adam);
        }
        history.epoch_loss.push_back(epoch_loss / double(n));
    }
    history.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    return history;
}

template <typename T>
std::vector<std::vector<T>> predict(ModelBundleT<T>& bundle, const EncodedBatch& batch) {
    validate_batch(bundle, batch, false);
    NetT<T> net(bundle);
    Rng rng(0); // eval mode never consumes randomness
    std::vector<std::vector<T>> probs;
    probs.reserve(batch.sequences.size());
    for (const auto& seq : batch.sequences)
        probs.push_back(net.forward(seq, Mode::Eval, rng));
    return probs;
}

template struct ModelBundleT<float>;
template struct ModelBundleT<double>;
template class NetT<float>;
template class NetT<double>;
template ModelBundleT<float> build_model<float>(Architecture, const Vocabulary&,
                                                const EmbeddingMatrixT<float>&,
                                                std::vector<std::string>, std::size_t,
                                                const Hyperparams&, std::uint64_t);
template ModelBundleT<double> build_model<double>(Architecture, const Vocabulary&,
                                                  const EmbeddingMatrixT<double>&,
                                                  std::vector<std::string>, std::size_t,
                                                  const Hyperparams&, std::uint64_t);
template TrainHistory train<float>(ModelBundleT<float>&, const EncodedBatch&);
template TrainHistory train<double>(ModelBundleT<double>&, const EncodedBatch&);
template std::vector<std::vector<float>> predict<float>(ModelBundleT<float>&,
                                                        const EncodedBatch&);
template std::vector<std::vector<double>> predict<double>(ModelBundleT<double>&,
                                                          const EncodedBatch&);

} // namespace cbd
