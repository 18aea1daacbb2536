#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbd/layers.hpp"
#include "cbd/params.hpp"
#include "cbd/tensor.hpp"

namespace cbd {

// Soft attention over per-timestep states:
//   M = tanh(H), alpha = softmax(M w), r = H^T alpha, out = tanh(r)
// alpha sums to 1 over the T axis.
template <typename T>
class AttentionLayerT {
public:
    AttentionLayerT(LayerParamsT<T>& params, const std::string& w_name) : params_(&params) {
        for (std::size_t i = 0; i < params.size(); ++i)
            if (params[i].name == w_name) w_ix_ = i;
        if (w_ix_ == npos) throw std::invalid_argument("attention parameter not found: " + w_name);
    }

    std::vector<T> forward(const TensorT<T>& H) {
        const auto& w = (*params_)[w_ix_].value;
        const std::size_t Tlen = H.shape[0], h = H.shape[1];
        if (w.numel() != h) throw std::runtime_error("attention weight size mismatch");
        if (Tlen < 1) throw std::runtime_error("attention needs at least one timestep");
        H_ = H;
        M_ = TensorT<T>(H.shape);
        for (std::size_t i = 0; i < H.numel(); ++i)
            M_.data[i] = static_cast<T>(std::tanh(static_cast<double>(H.data[i])));
        std::vector<T> scores(Tlen);
        for (std::size_t t = 0; t < Tlen; ++t) {
            double acc = 0.0;
            const T* row = M_.data.data() + t * h;
            for (std::size_t q = 0; q < h; ++q)
                acc += static_cast<double>(row[q]) * static_cast<double>(w.data[q]);
            scores[t] = static_cast<T>(acc);
        }
        alpha_ = softmax(scores);
        r_.assign(h, T(0));
        for (std::size_t t = 0; t < Tlen; ++t) {
            const T* row = H.data.data() + t * h;
            for (std::size_t q = 0; q < h; ++q) r_[q] += alpha_[t] * row[q];
        }
        out_.resize(h);
        for (std::size_t q = 0; q < h; ++q)
            out_[q] = static_cast<T>(std::tanh(static_cast<double>(r_[q])));
        return out_;
    }

    const std::vector<T>& alpha() const { return alpha_; }

    // dout in, dH out; accumulates dw.
    TensorT<T> backward(const std::vector<T>& dout) {
        const std::size_t Tlen = H_.shape[0], h = H_.shape[1];
        auto& wp = (*params_)[w_ix_];

        std::vector<double> dr(h);
        for (std::size_t q = 0; q < h; ++q) {
            const double o = static_cast<double>(out_[q]);
            dr[q] = static_cast<double>(dout[q]) * (1.0 - o * o);
        }

        TensorT<T> dH(H_.shape);
        std::vector<double> dalpha(Tlen, 0.0);
        for (std::size_t t = 0; t < Tlen; ++t) {
            const T* hrow = H_.data.data() + t * h;
            T* drow = dH.data.data() + t * h;
            double acc = 0.0;
            for (std::size_t q = 0; q < h; ++q) {
                acc += static_cast<double>(hrow[q]) * dr[q];
                drow[q] = static_cast<T>(static_cast<double>(alpha_[t]) * dr[q]);
            }
            dalpha[t] = acc;
        }

        // softmax backward over the score axis
        double dot = 0.0;
        for (std::size_t t = 0; t < Tlen; ++t) dot += static_cast<double>(alpha_[t]) * dalpha[t];
        std::vector<double> ds(Tlen);
        for (std::size_t t = 0; t < Tlen; ++t)
            ds[t] = static_cast<double>(alpha_[t]) * (dalpha[t] - dot);

        for (std::size_t t = 0; t < Tlen; ++t) {
            const T* mrow = M_.data.data() + t * h;
            T* drow = dH.data.data() + t * h;
            for (std::size_t q = 0; q < h; ++q) {
                wp.grad.data[q] += static_cast<T>(ds[t] * static_cast<double>(mrow[q]));
                const double m = static_cast<double>(mrow[q]);
                drow[q] += static_cast<T>(ds[t] * static_cast<double>(wp.value.data[q]) *
                                          (1.0 - m * m));
            }
        }
        return dH;
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    LayerParamsT<T>* params_;
    std::size_t w_ix_ = npos;
    TensorT<T> H_, M_;
    std::vector<T> alpha_, r_, out_;
};

} // namespace cbd
