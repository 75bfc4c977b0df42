#pragma once

#include <algorithm>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "capgen/nn.hpp"

namespace capgen::nn {

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> per_param;

    double max_rel_err() const {
        double m = 0.0;
        for (const auto& e : per_param) m = std::max(m, e.max_rel_err);
        return m;
    }
    bool passed(double tolerance) const { return max_rel_err() < tolerance; }
};

// Central-difference verification of analytic gradients, meant to run on a
// 64-bit instantiation of the graph.
//   loss_and_grad: accumulates gradients into the listed parameters (their
//                  grads are zeroed here first) and returns the loss.
//   loss_only:     pure re-evaluation of the same loss at the current values.
// Relative error per component: |a - n| / max(|a|, |n|, 1e-8).
inline GradCheckReport gradient_check(std::span<Parameter<double>* const> params,
                                      const std::function<double()>& loss_and_grad,
                                      const std::function<double()>& loss_only, double step = 1e-5) {
    for (auto* p : params) p->zero_grad();
    loss_and_grad();

    std::vector<Tensor<double>> analytic;
    analytic.reserve(params.size());
    for (auto* p : params) analytic.push_back(p->grad);

    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter<double>& p = *params[pi];
        GradCheckEntry entry{p.name, 0.0};
        for (std::size_t k = p.frozen_prefix; k < p.value.size(); ++k) {
            const double saved = p.value[k];
            p.value[k] = saved + step;
            const double up = loss_only();
            p.value[k] = saved - step;
            const double down = loss_only();
            p.value[k] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[pi][k];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            entry.max_rel_err = std::max(entry.max_rel_err, std::abs(a - numeric) / denom);
        }
        report.per_param.push_back(std::move(entry));
    }
    return report;
}

}  // namespace capgen::nn
