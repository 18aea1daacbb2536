#include "cbd/verification.hpp"

#include <algorithm>

#include "cbd/gradcheck.hpp"
#include "cbd/model.hpp"

namespace cbd {

namespace {

Vocabulary toy_vocab() {
    std::vector<std::vector<std::string>> posts;
    for (int i = 0; i < 10; ++i) posts.push_back({"tok" + std::to_string(i)});
    return build_vocab(posts);
}

}  // namespace

VerificationReport run_gradient_verification(std::size_t seeds) {
    const Vocabulary vocab = toy_vocab();
    const std::size_t l_max = 5;
    Hyperparams hp;
    hp.hidden_size = 4;
    hp.filters = 6;
    hp.kernel_width = 2;
    hp.dropout_embed = 0.0;
    hp.dropout_final = 0.0;

    VerificationReport report;
    for (Architecture arch : {Architecture::Cnn, Architecture::Lstm, Architecture::Blstm,
                              Architecture::BlstmAttn}) {
        for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
            Rng rng(derive_seed(seed, "gradcheck"));
            auto embedding = init_random_embedding<double>(vocab, 3, rng);
            auto bundle = build_model<double>(arch, vocab, embedding,
                                              {"none", "racism", "sexism"}, l_max, hp, seed);
            // Spread the embedding rows out: rows drawn from ±0.05 sit close
            // enough to tie that the CNN max-pool argmax can flip under the
            // finite-difference step.
            auto& E = bundle.params.at("embedding.E").value;
            for (std::size_t r = 1; r < E.shape[0]; ++r)
                for (std::size_t c = 0; c < E.shape[1]; ++c)
                    E.at2(r, c) = rng.uniform(-0.5, 0.5);

            // Distinct ids per sequence: a repeated token can produce two
            // bit-identical conv windows whose max-pool tie flips under the
            // finite-difference step. PAD/UNK enter via the shuffled pool.
            std::vector<std::vector<std::int32_t>> seqs(3);
            std::vector<std::size_t> targets(3);
            std::vector<std::int32_t> pool(vocab.size());
            for (std::size_t id = 0; id < pool.size(); ++id) pool[id] = std::int32_t(id);
            for (std::size_t i = 0; i < seqs.size(); ++i) {
                rng.shuffle(pool);
                seqs[i].assign(pool.begin(), pool.begin() + l_max);
                targets[i] = rng.index(3);
            }

            NetT<double> net(bundle);
            Rng dummy(0);
            auto loss = [&] {
                double acc = 0.0;
                for (std::size_t i = 0; i < seqs.size(); ++i)
                    acc += cross_entropy_loss(net.forward(seqs[i], Mode::Eval, dummy),
                                              targets[i]);
                return acc;
            };
            auto grads = [&] {
                bundle.params.zero_grads();
                for (std::size_t i = 0; i < seqs.size(); ++i) {
                    auto probs = net.forward(seqs[i], Mode::Eval, dummy);
                    net.backward(cross_entropy_dlogits(probs, targets[i], 1.0), seqs[i]);
                }
            };
            auto check = grad_check(items_of(bundle.params), loss, grads, 1e-4);

            ArchitectureCheck entry;
            entry.architecture = to_string(arch);
            entry.seed = seed;
            entry.max_rel_error = check.max_rel_error;
            entry.worst_param = check.worst_param;
            report.worst = std::max(report.worst, check.max_rel_error);
            report.checks.push_back(std::move(entry));
        }
    }
    return report;
}

} // namespace cbd
