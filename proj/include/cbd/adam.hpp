#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cbd/params.hpp"
#include "cbd/tensor.hpp"

namespace cbd {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment estimates per parameter, kept in parameter order.
template <typename T>
struct AdamStateT {
    AdamConfig cfg;
    std::vector<TensorT<T>> m;
    std::vector<TensorT<T>> v;
    std::uint64_t t = 0;

    explicit AdamStateT(const LayerParamsT<T>& params, AdamConfig c = {}) : cfg(c) {
        m.reserve(params.size());
        v.reserve(params.size());
        for (const auto& p : params) {
            m.emplace_back(p.value.shape);
            v.emplace_back(p.value.shape);
        }
    }
};

using AdamState = AdamStateT<float>;

// Bias-corrected Adam update, applied in place. Grads must be finite;
// a bad gradient aborts the step and names the offending parameter.
template <typename T>
void adam_step(LayerParamsT<T>& params, AdamStateT<T>& state) {
    if (state.m.size() != params.size())
        throw std::invalid_argument("adam state does not match parameter list");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].grad.all_finite())
            throw std::runtime_error("non-finite gradient for parameter " + params[i].name);
        if (!params[i].grad.same_shape(state.m[i]))
            throw std::invalid_argument("adam moment shape mismatch for " + params[i].name);
    }

    state.t += 1;
    const double b1 = state.cfg.beta1;
    const double b2 = state.cfg.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& value = params[i].value.data;
        auto& grad = params[i].grad.data;
        auto& m = state.m[i].data;
        auto& v = state.v[i].data;
        for (std::size_t j = 0; j < value.size(); ++j) {
            const double g = static_cast<double>(grad[j]);
            const double mj = b1 * static_cast<double>(m[j]) + (1.0 - b1) * g;
            const double vj = b2 * static_cast<double>(v[j]) + (1.0 - b2) * g * g;
            m[j] = static_cast<T>(mj);
            v[j] = static_cast<T>(vj);
            const double mhat = mj / corr1;
            const double vhat = vj / corr2;
            value[j] = static_cast<T>(static_cast<double>(value[j]) -
                                      state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.eps));
        }
    }
}

} // namespace cbd
