#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbd/params.hpp"
#include "cbd/rng.hpp"
#include "cbd/tensor.hpp"

namespace cbd {

// Uniform fan-based (Glorot) init; biases stay zero.
template <typename T>
void glorot_uniform(TensorT<T>& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : t.data) v = static_cast<T>(rng.uniform(-limit, limit));
}

// ---- embedding lookup ----

// Gathers one row of E per index; output is seq_len x d.
template <typename T>
TensorT<T> embedding_forward(const std::vector<std::int32_t>& indices, const TensorT<T>& E) {
    if (E.shape.size() != 2) throw std::invalid_argument("embedding matrix must be 2-D");
    const std::size_t V = E.shape[0], d = E.shape[1];
    TensorT<T> out({indices.size(), d});
    for (std::size_t t = 0; t < indices.size(); ++t) {
        const std::int32_t ix = indices[t];
        if (ix < 0 || static_cast<std::size_t>(ix) >= V)
            throw std::runtime_error("embedding index " + std::to_string(ix) +
                                     " out of range [0," + std::to_string(V) +
                                     ") at position " + std::to_string(t));
        const T* src = E.data.data() + static_cast<std::size_t>(ix) * d;
        std::copy(src, src + d, out.data.data() + t * d);
    }
    return out;
}

// Accumulates output-gradients back into the selected rows of dE.
template <typename T>
void embedding_backward(const std::vector<std::int32_t>& indices, const TensorT<T>& dY,
                        TensorT<T>& dE) {
    const std::size_t d = dE.shape[1];
    for (std::size_t t = 0; t < indices.size(); ++t) {
        T* dst = dE.data.data() + static_cast<std::size_t>(indices[t]) * d;
        const T* src = dY.data.data() + t * d;
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
}

// ---- inverted dropout ----

enum class Mode { Train, Eval };

template <typename T>
class DropoutT {
public:
    explicit DropoutT(double rate) : rate_(rate) {
        if (rate < 0.0 || rate >= 1.0)
            throw std::invalid_argument("dropout rate must be in [0,1)");
    }

    // Train mode zeroes elements with probability `rate` and scales
    // survivors by 1/(1-rate); eval mode is the exact identity.
    TensorT<T> forward(const TensorT<T>& x, Mode mode, Rng& rng) {
        if (mode == Mode::Eval || rate_ == 0.0) {
            mask_.shape.clear();
            mask_.data.clear();
            return x;
        }
        const T scale = static_cast<T>(1.0 / (1.0 - rate_));
        mask_ = TensorT<T>(x.shape);
        TensorT<T> out(x.shape);
        for (std::size_t i = 0; i < x.numel(); ++i) {
            const T m = rng.bernoulli(rate_) ? T(0) : scale;
            mask_.data[i] = m;
            out.data[i] = x.data[i] * m;
        }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& dY) const {
        if (mask_.data.empty()) return dY; // eval or rate 0
        TensorT<T> dx(dY.shape);
        for (std::size_t i = 0; i < dY.numel(); ++i) dx.data[i] = dY.data[i] * mask_.data[i];
        return dx;
    }

    double rate() const { return rate_; }

private:
    double rate_;
    TensorT<T> mask_;
};

// ---- dense + softmax head ----

template <typename T>
std::vector<T> softmax(const std::vector<T>& logits) {
    const T mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    std::vector<T> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double e = std::exp(static_cast<double>(logits[i] - mx));
        out[i] = static_cast<T>(e);
        sum += e;
    }
    for (auto& v : out) v = static_cast<T>(static_cast<double>(v) / sum);
    return out;
}

// W is C x n, b is C. Cached input/probs serve the backward pass.
template <typename T>
class DenseSoftmaxT {
public:
    DenseSoftmaxT(LayerParamsT<T>& params, const std::string& w_name, const std::string& b_name)
        : params_(&params) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (params[i].name == w_name) w_ix_ = i;
            if (params[i].name == b_name) b_ix_ = i;
        }
        if (w_ix_ == npos || b_ix_ == npos)
            throw std::invalid_argument("dense parameters not found: " + w_name + ", " + b_name);
    }

    std::vector<T> forward(const std::vector<T>& x) {
        const auto& W = (*params_)[w_ix_].value;
        const auto& b = (*params_)[b_ix_].value;
        const std::size_t C = W.shape[0], n = W.shape[1];
        if (x.size() != n) throw std::invalid_argument("dense input size mismatch");
        x_ = x;
        std::vector<T> logits(C);
        for (std::size_t c = 0; c < C; ++c) {
            double acc = static_cast<double>(b.data[c]);
            const T* row = W.data.data() + c * n;
            for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(row[i]) * x[i];
            logits[c] = static_cast<T>(acc);
        }
        probs_ = softmax(logits);
        return probs_;
    }

    // dlogits in, dx out; accumulates dW, db.
    std::vector<T> backward(const std::vector<T>& dlogits) {
        auto& Wp = (*params_)[w_ix_];
        auto& bp = (*params_)[b_ix_];
        const std::size_t C = Wp.value.shape[0], n = Wp.value.shape[1];
        std::vector<T> dx(n, T(0));
        for (std::size_t c = 0; c < C; ++c) {
            const T dz = dlogits[c];
            bp.grad.data[c] += dz;
            const T* wrow = Wp.value.data.data() + c * n;
            T* gw = Wp.grad.data.data() + c * n;
            for (std::size_t i = 0; i < n; ++i) {
                gw[i] += dz * x_[i];
                dx[i] += dz * wrow[i];
            }
        }
        return dx;
    }

    const std::vector<T>& probs() const { return probs_; }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    LayerParamsT<T>* params_;
    std::size_t w_ix_ = npos, b_ix_ = npos;
    std::vector<T> x_;
    std::vector<T> probs_;
};

// ---- categorical cross-entropy ----

template <typename T>
double cross_entropy_loss(const std::vector<T>& probs, std::size_t target) {
    if (target >= probs.size())
        throw std::runtime_error("cross-entropy target " + std::to_string(target) +
                                 " out of range for " + std::to_string(probs.size()) + " classes");
    const double p = std::max(static_cast<double>(probs[target]), 1e-12);
    return -std::log(p);
}

// Gradient of the loss w.r.t. the logits feeding the softmax.
template <typename T>
std::vector<T> cross_entropy_dlogits(const std::vector<T>& probs, std::size_t target, T scale) {
    std::vector<T> dz(probs.begin(), probs.end());
    dz[target] -= T(1);
    for (auto& v : dz) v *= scale;
    return dz;
}

// ---- 1-D convolution over time + global max-pool ----

// filters is F x k x d, bias F. Valid convolution, one max per filter;
// backward routes gradient only to argmax positions.
template <typename T>
class Conv1dMaxPoolT {
public:
    Conv1dMaxPoolT(LayerParamsT<T>& params, const std::string& filt_name,
                   const std::string& bias_name)
        : params_(&params) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (params[i].name == filt_name) f_ix_ = i;
            if (params[i].name == bias_name) b_ix_ = i;
        }
        if (f_ix_ == npos || b_ix_ == npos)
            throw std::invalid_argument("conv parameters not found: " + filt_name + ", " + bias_name);
    }

    std::vector<T> forward(const TensorT<T>& x) {
        const auto& filt = (*params_)[f_ix_].value; // F x k x d
        const auto& bias = (*params_)[b_ix_].value;
        const std::size_t F = filt.shape[0], k = filt.shape[1], d = filt.shape[2];
        const std::size_t Tlen = x.shape[0];
        if (x.shape[1] != d) throw std::invalid_argument("conv input width mismatch");
        if (Tlen < k)
            throw std::runtime_error("conv input length " + std::to_string(Tlen) +
                                     " shorter than kernel width " + std::to_string(k));
        x_ = x;
        argmax_.assign(F, 0);
        std::vector<T> pooled(F);
        const std::size_t steps = Tlen - k + 1;
        for (std::size_t f = 0; f < F; ++f) {
            const T* w = filt.data.data() + f * k * d;
            T best = T(0);
            std::size_t best_t = 0;
            for (std::size_t t = 0; t < steps; ++t) {
                double acc = static_cast<double>(bias.data[f]);
                const T* win = x.data.data() + t * d;
                for (std::size_t j = 0; j < k * d; ++j) acc += static_cast<double>(w[j]) * win[j];
                const T val = static_cast<T>(acc);
                if (t == 0 || val > best) {
                    best = val;
                    best_t = t;
                }
            }
            pooled[f] = best;
            argmax_[f] = best_t;
        }
        return pooled;
    }

    TensorT<T> backward(const std::vector<T>& dY) {
        auto& fp = (*params_)[f_ix_];
        auto& bp = (*params_)[b_ix_];
        const std::size_t F = fp.value.shape[0], k = fp.value.shape[1], d = fp.value.shape[2];
        TensorT<T> dx(x_.shape);
        for (std::size_t f = 0; f < F; ++f) {
            const T g = dY[f];
            if (g == T(0)) continue;
            const std::size_t t0 = argmax_[f];
            bp.grad.data[f] += g;
            const T* win = x_.data.data() + t0 * d;
            const T* w = fp.value.data.data() + f * k * d;
            T* gw = fp.grad.data.data() + f * k * d;
            T* gx = dx.data.data() + t0 * d;
            for (std::size_t j = 0; j < k * d; ++j) {
                gw[j] += g * win[j];
                gx[j] += g * w[j];
            }
        }
        return dx;
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    LayerParamsT<T>* params_;
    std::size_t f_ix_ = npos, b_ix_ = npos;
    TensorT<T> x_;
    std::vector<std::size_t> argmax_;
};

} // namespace cbd
