#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cbd/params.hpp"
#include "cbd/tensor.hpp"

namespace cbd {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

struct GradCheckItem {
    std::string name;
    Tensor64* value;
    Tensor64* grad;
};

// Central finite differences against analytic gradients, 64-bit only.
// `loss` evaluates the model at the current parameter values; `compute_grads`
// zeroes gradient slots and runs one forward+backward. Relative error is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
inline GradCheckReport grad_check(const std::vector<GradCheckItem>& items,
                                  const std::function<double()>& loss,
                                  const std::function<void()>& compute_grads,
                                  double step = 1e-3) {
    compute_grads();
    std::vector<std::vector<double>> analytic;
    analytic.reserve(items.size());
    for (const auto& it : items)
        analytic.emplace_back(it.grad->data.begin(), it.grad->data.end());

    GradCheckReport report;
    for (std::size_t k = 0; k < items.size(); ++k) {
        Tensor64& value = *items[k].value;
        for (std::size_t j = 0; j < value.numel(); ++j) {
            const double saved = value.data[j];
            value.data[j] = saved + step;
            const double up = loss();
            value.data[j] = saved - step;
            const double down = loss();
            value.data[j] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[k][j];
            const double rel =
                std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = items[k].name;
                report.worst_index = j;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

inline std::vector<GradCheckItem> items_of(LayerParamsT<double>& params) {
    std::vector<GradCheckItem> items;
    for (auto& p : params) items.push_back({p.name, &p.value, &p.grad});
    return items;
}

} // namespace cbd
