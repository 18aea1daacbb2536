#pragma once

#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbd/tensor.hpp"

namespace cbd {

// One named trainable tensor plus its same-shaped gradient slot.
template <typename T>
struct ParamT {
    std::string name;
    TensorT<T> value;
    TensorT<T> grad;
};

// Ordered collection of named parameters. Order is insertion order and is
// part of the serialization / optimizer-state contract. Deque storage keeps
// references returned by add() valid across later insertions.
template <typename T>
class LayerParamsT {
public:
    ParamT<T>& add(const std::string& name, std::vector<std::size_t> shape) {
        if (find(name) != nullptr)
            throw std::invalid_argument("duplicate parameter name: " + name);
        ParamT<T> p;
        p.name = name;
        p.value = TensorT<T>(shape);
        p.grad = TensorT<T>(std::move(shape));
        items_.push_back(std::move(p));
        return items_.back();
    }

    ParamT<T>* find(const std::string& name) {
        for (auto& p : items_)
            if (p.name == name) return &p;
        return nullptr;
    }
    const ParamT<T>* find(const std::string& name) const {
        for (auto& p : items_)
            if (p.name == name) return &p;
        return nullptr;
    }

    ParamT<T>& at(const std::string& name) {
        if (auto* p = find(name)) return *p;
        throw std::out_of_range("no parameter named " + name);
    }
    const ParamT<T>& at(const std::string& name) const {
        if (auto* p = find(name)) return *p;
        throw std::out_of_range("no parameter named " + name);
    }

    void zero_grads() {
        for (auto& p : items_) p.grad.fill(T(0));
    }

    std::size_t size() const { return items_.size(); }
    ParamT<T>& operator[](std::size_t i) { return items_[i]; }
    const ParamT<T>& operator[](std::size_t i) const { return items_[i]; }

    auto begin() { return items_.begin(); }
    auto end() { return items_.end(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

private:
    std::deque<ParamT<T>> items_;
};

using LayerParams = LayerParamsT<float>;

} // namespace cbd
