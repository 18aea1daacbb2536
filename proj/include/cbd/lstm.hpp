#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbd/layers.hpp"
#include "cbd/params.hpp"
#include "cbd/tensor.hpp"

namespace cbd {

template <typename T>
inline T sigmoid(T x) {
    return static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(x))));
}

enum class Direction { Forward, Backward };

// Standard LSTM cell unrolled over the sequence, h0 = c0 = 0:
//   i,f,o = sigmoid(x W + h U + b), g = tanh(x W + h U + b)
//   c_t = f . c_{t-1} + i . g,  h_t = o . tanh(c_t)
// Backward direction runs over the reversed sequence and reports states
// re-reversed to original time order.
template <typename T>
class LstmLayerT {
public:
    // Gate order i, f, o, g throughout.
    static constexpr const char* kGates = "ifog";

    static void add_params(LayerParamsT<T>& params, const std::string& prefix, std::size_t d,
                           std::size_t h) {
        for (char gate : std::string(kGates)) {
            params.add(prefix + ".W_" + gate, {d, h});
            params.add(prefix + ".U_" + gate, {h, h});
            params.add(prefix + ".b_" + gate, {h});
        }
    }

    static void init_params(LayerParamsT<T>& params, const std::string& prefix, std::size_t d,
                            std::size_t h, Rng& rng) {
        for (char gate : std::string(kGates)) {
            glorot_uniform(params.at(prefix + ".W_" + gate).value, d, h, rng);
            glorot_uniform(params.at(prefix + ".U_" + gate).value, h, h, rng);
            // biases stay zero
        }
    }

    LstmLayerT(LayerParamsT<T>& params, const std::string& prefix, Direction dir)
        : params_(&params), dir_(dir) {
        const std::string gates(kGates);
        for (std::size_t g = 0; g < 4; ++g) {
            w_ix_[g] = index_of(params, prefix + ".W_" + gates[g]);
            u_ix_[g] = index_of(params, prefix + ".U_" + gates[g]);
            b_ix_[g] = index_of(params, prefix + ".b_" + gates[g]);
        }
        d_ = (*params_)[w_ix_[0]].value.shape[0];
        h_ = (*params_)[w_ix_[0]].value.shape[1];
    }

    std::size_t hidden_size() const { return h_; }

    // x is T x d; returns hidden state at every timestep, T x h.
    TensorT<T> forward(const TensorT<T>& x) {
        if (x.shape.size() != 2 || x.shape[1] != d_)
            throw std::runtime_error("lstm input shape " + shape_str(x.shape) +
                                     " does not match input size " + std::to_string(d_));
        const std::size_t Tlen = x.shape[0];
        x_int_ = TensorT<T>({Tlen, d_});
        for (std::size_t s = 0; s < Tlen; ++s) {
            const std::size_t src = pos(s, Tlen);
            std::copy(x.data.begin() + src * d_, x.data.begin() + (src + 1) * d_,
                      x_int_.data.begin() + s * d_);
        }

        for (auto& g : gates_) g = TensorT<T>({Tlen, h_});
        c_ = TensorT<T>({Tlen, h_});
        tanh_c_ = TensorT<T>({Tlen, h_});
        h_states_ = TensorT<T>({Tlen, h_});

        std::vector<double> pre(h_);
        for (std::size_t s = 0; s < Tlen; ++s) {
            const T* xs = x_int_.data.data() + s * d_;
            const T* hprev = s > 0 ? h_states_.data.data() + (s - 1) * h_ : nullptr;
            for (std::size_t g = 0; g < 4; ++g) {
                const auto& W = (*params_)[w_ix_[g]].value;
                const auto& U = (*params_)[u_ix_[g]].value;
                const auto& b = (*params_)[b_ix_[g]].value;
                for (std::size_t q = 0; q < h_; ++q) pre[q] = static_cast<double>(b.data[q]);
                for (std::size_t p = 0; p < d_; ++p) {
                    const double xv = static_cast<double>(xs[p]);
                    const T* wrow = W.data.data() + p * h_;
                    for (std::size_t q = 0; q < h_; ++q) pre[q] += xv * wrow[q];
                }
                if (hprev) {
                    for (std::size_t p = 0; p < h_; ++p) {
                        const double hv = static_cast<double>(hprev[p]);
                        const T* urow = U.data.data() + p * h_;
                        for (std::size_t q = 0; q < h_; ++q) pre[q] += hv * urow[q];
                    }
                }
                T* out = gates_[g].data.data() + s * h_;
                for (std::size_t q = 0; q < h_; ++q)
                    out[q] = (g == 3) ? static_cast<T>(std::tanh(pre[q]))
                                      : sigmoid(static_cast<T>(pre[q]));
            }
            const T* gi = gates_[0].data.data() + s * h_;
            const T* gf = gates_[1].data.data() + s * h_;
            const T* go = gates_[2].data.data() + s * h_;
            const T* gg = gates_[3].data.data() + s * h_;
            const T* cprev = s > 0 ? c_.data.data() + (s - 1) * h_ : nullptr;
            T* cs = c_.data.data() + s * h_;
            T* tcs = tanh_c_.data.data() + s * h_;
            T* hs = h_states_.data.data() + s * h_;
            for (std::size_t q = 0; q < h_; ++q) {
                cs[q] = gi[q] * gg[q] + (cprev ? gf[q] * cprev[q] : T(0));
                tcs[q] = static_cast<T>(std::tanh(static_cast<double>(cs[q])));
                hs[q] = go[q] * tcs[q];
            }
        }

        TensorT<T> out({Tlen, h_});
        for (std::size_t s = 0; s < Tlen; ++s) {
            std::copy(h_states_.data.begin() + s * h_, h_states_.data.begin() + (s + 1) * h_,
                      out.data.begin() + pos(s, Tlen) * h_);
        }
        return out;
    }

    // dH is T x h in original time order; returns dx (T x d) and
    // accumulates parameter gradients.
    TensorT<T> backward(const TensorT<T>& dH) {
        const std::size_t Tlen = x_int_.shape[0];
        if (dH.shape.size() != 2 || dH.shape[0] != Tlen || dH.shape[1] != h_)
            throw std::runtime_error("lstm upstream gradient shape mismatch");

        TensorT<T> dx_int({Tlen, d_});
        std::vector<double> dh_carry(h_, 0.0), dc_carry(h_, 0.0);
        std::vector<double> dgate[4];
        for (auto& v : dgate) v.assign(h_, 0.0);

        for (std::size_t si = Tlen; si-- > 0;) {
            const T* gi = gates_[0].data.data() + si * h_;
            const T* gf = gates_[1].data.data() + si * h_;
            const T* go = gates_[2].data.data() + si * h_;
            const T* gg = gates_[3].data.data() + si * h_;
            const T* tcs = tanh_c_.data.data() + si * h_;
            const T* cprev = si > 0 ? c_.data.data() + (si - 1) * h_ : nullptr;
            const T* dh_up = dH.data.data() + pos(si, Tlen) * h_;

            for (std::size_t q = 0; q < h_; ++q) {
                const double dh = static_cast<double>(dh_up[q]) + dh_carry[q];
                const double tc = static_cast<double>(tcs[q]);
                const double dout = dh * tc;
                const double dc = dc_carry[q] + dh * static_cast<double>(go[q]) * (1.0 - tc * tc);
                const double di = dc * static_cast<double>(gg[q]);
                const double dg = dc * static_cast<double>(gi[q]);
                const double df = cprev ? dc * static_cast<double>(cprev[q]) : 0.0;
                dc_carry[q] = dc * static_cast<double>(gf[q]);
                const double iv = gi[q], fv = gf[q], ov = go[q], gv = gg[q];
                dgate[0][q] = di * iv * (1.0 - iv);
                dgate[1][q] = df * fv * (1.0 - fv);
                dgate[2][q] = dout * ov * (1.0 - ov);
                dgate[3][q] = dg * (1.0 - gv * gv);
            }

            const T* xs = x_int_.data.data() + si * d_;
            const T* hprev = si > 0 ? h_states_.data.data() + (si - 1) * h_ : nullptr;
            T* dxs = dx_int.data.data() + si * d_;
            std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
            for (std::size_t g = 0; g < 4; ++g) {
                auto& Wp = (*params_)[w_ix_[g]];
                auto& Up = (*params_)[u_ix_[g]];
                auto& bp = (*params_)[b_ix_[g]];
                for (std::size_t q = 0; q < h_; ++q)
                    bp.grad.data[q] += static_cast<T>(dgate[g][q]);
                for (std::size_t p = 0; p < d_; ++p) {
                    const double xv = static_cast<double>(xs[p]);
                    T* gw = Wp.grad.data.data() + p * h_;
                    const T* wrow = Wp.value.data.data() + p * h_;
                    double acc = 0.0;
                    for (std::size_t q = 0; q < h_; ++q) {
                        gw[q] += static_cast<T>(xv * dgate[g][q]);
                        acc += static_cast<double>(wrow[q]) * dgate[g][q];
                    }
                    dxs[p] += static_cast<T>(acc);
                }
                for (std::size_t p = 0; p < h_; ++p) {
                    const double hv = hprev ? static_cast<double>(hprev[p]) : 0.0;
                    T* gu = Up.grad.data.data() + p * h_;
                    const T* urow = Up.value.data.data() + p * h_;
                    double acc = 0.0;
                    for (std::size_t q = 0; q < h_; ++q) {
                        if (hprev) gu[q] += static_cast<T>(hv * dgate[g][q]);
                        acc += static_cast<double>(urow[q]) * dgate[g][q];
                    }
                    dh_carry[p] += acc;
                }
            }
        }

        TensorT<T> dx({Tlen, d_});
        for (std::size_t s = 0; s < Tlen; ++s) {
            std::copy(dx_int.data.begin() + s * d_, dx_int.data.begin() + (s + 1) * d_,
                      dx.data.begin() + pos(s, Tlen) * d_);
        }
        return dx;
    }

private:
    static std::size_t index_of(const LayerParamsT<T>& params, const std::string& name) {
        for (std::size_t i = 0; i < params.size(); ++i)
            if (params[i].name == name) return i;
        throw std::invalid_argument("lstm parameter not found: " + name);
    }

    std::size_t pos(std::size_t s, std::size_t Tlen) const {
        return dir_ == Direction::Forward ? s : Tlen - 1 - s;
    }

    LayerParamsT<T>* params_;
    Direction dir_;
    std::array<std::size_t, 4> w_ix_{}, u_ix_{}, b_ix_{};
    std::size_t d_ = 0, h_ = 0;

    // caches in internal (processing) order
    TensorT<T> x_int_;
    std::array<TensorT<T>, 4> gates_;
    TensorT<T> c_, tanh_c_, h_states_;
};

// Two LSTMs over opposite directions; output row t is [h_fwd_t ; h_bwd_t].
template <typename T>
class BlstmLayerT {
public:
    BlstmLayerT(LayerParamsT<T>& params, const std::string& fwd_prefix,
                const std::string& bwd_prefix)
        : fwd_(params, fwd_prefix, Direction::Forward),
          bwd_(params, bwd_prefix, Direction::Backward) {
        if (fwd_.hidden_size() != bwd_.hidden_size())
            throw std::invalid_argument("blstm direction hidden sizes differ");
    }

    std::size_t hidden_size() const { return fwd_.hidden_size(); }

    TensorT<T> forward(const TensorT<T>& x) {
        TensorT<T> hf = fwd_.forward(x);
        TensorT<T> hb = bwd_.forward(x);
        const std::size_t Tlen = hf.shape[0], h = hf.shape[1];
        TensorT<T> out({Tlen, 2 * h});
        for (std::size_t t = 0; t < Tlen; ++t) {
            std::copy(hf.data.begin() + t * h, hf.data.begin() + (t + 1) * h,
                      out.data.begin() + t * 2 * h);
            std::copy(hb.data.begin() + t * h, hb.data.begin() + (t + 1) * h,
                      out.data.begin() + t * 2 * h + h);
        }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& dH2) {
        const std::size_t Tlen = dH2.shape[0];
        const std::size_t h = hidden_size();
        TensorT<T> dhf({Tlen, h}), dhb({Tlen, h});
        for (std::size_t t = 0; t < Tlen; ++t) {
            std::copy(dH2.data.begin() + t * 2 * h, dH2.data.begin() + t * 2 * h + h,
                      dhf.data.begin() + t * h);
            std::copy(dH2.data.begin() + t * 2 * h + h, dH2.data.begin() + (t + 1) * 2 * h,
                      dhb.data.begin() + t * h);
        }
        TensorT<T> dxf = fwd_.backward(dhf);
        TensorT<T> dxb = bwd_.backward(dhb);
        for (std::size_t i = 0; i < dxf.numel(); ++i) dxf.data[i] += dxb.data[i];
        return dxf;
    }

private:
    LstmLayerT<T> fwd_;
    LstmLayerT<T> bwd_;
};

} // namespace cbd
