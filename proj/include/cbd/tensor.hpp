#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbd {

// Dense n-dimensional array, row-major. float for training, double for
// gradient verification; every numeric kernel in the library is templated
// on the scalar so both instantiations share one code path.
template <typename T>
struct TensorT {
    std::vector<std::size_t> shape;
    std::vector<T> data;

    TensorT() = default;

    explicit TensorT(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(numel_of(shape), T(0));
    }

    TensorT(std::vector<std::size_t> s, std::vector<T> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != numel_of(shape))
            throw std::invalid_argument("tensor data length does not match shape");
    }

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t v : s) {
            if (v == 0) throw std::invalid_argument("tensor shape has zero extent");
            n *= v;
        }
        return n;
    }

    std::size_t numel() const { return data.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }

    T& at(std::size_t i) { return data[i]; }
    const T& at(std::size_t i) const { return data[i]; }

    // 2-D access; callers index flat for hot loops
    T& at2(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
    const T& at2(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

template <typename T>
void check_finite(const TensorT<T>& t, const std::string& what) {
    if (!t.all_finite())
        throw std::runtime_error("non-finite values in " + what);
}

inline std::string shape_str(const std::vector<std::size_t>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

} // namespace cbd
