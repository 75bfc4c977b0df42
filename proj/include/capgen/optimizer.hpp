#pragma once

#include <cmath>
#include <vector>

#include "capgen/nn.hpp"

namespace capgen::nn {

struct OptimizerConfig {
    enum class Kind { adam, sgd };
    Kind kind = Kind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;    // adam
    double beta2 = 0.999;  // adam
    double epsilon = 1e-8; // adam
    double momentum = 0.9; // sgd
};

// One optimizer instance owns the moment buffers for a fixed parameter list.
template <typename T>
class Optimizer {
public:
    Optimizer(OptimizerConfig config, std::vector<Parameter<T>*> params)
        : cfg_(config), params_(std::move(params)) {
        slot_a_.reserve(params_.size());
        slot_b_.reserve(params_.size());
        for (auto* p : params_) {
            slot_a_.emplace_back(p->value.shape());
            if (cfg_.kind == OptimizerConfig::Kind::adam) slot_b_.emplace_back(p->value.shape());
        }
    }

    // Applies one update from the gradients currently stored in the
    // parameters. Gradients are left untouched; callers zero them per step.
    void step() {
        ++t_;
        if (cfg_.kind == OptimizerConfig::Kind::adam)
            adam_step();
        else
            sgd_step();
    }

private:
    void adam_step() {
        const T lr = static_cast<T>(cfg_.learning_rate);
        const T b1 = static_cast<T>(cfg_.beta1);
        const T b2 = static_cast<T>(cfg_.beta2);
        const T eps = static_cast<T>(cfg_.epsilon);
        const T corr1 = static_cast<T>(1.0 - std::pow(cfg_.beta1, t_));
        const T corr2 = static_cast<T>(1.0 - std::pow(cfg_.beta2, t_));
        for (std::size_t pi = 0; pi < params_.size(); ++pi) {
            Parameter<T>& p = *params_[pi];
            Tensor<T>& m = slot_a_[pi];
            Tensor<T>& v = slot_b_[pi];
            for (std::size_t k = p.frozen_prefix; k < p.value.size(); ++k) {
                const T g = p.grad[k];
                m[k] = b1 * m[k] + (T(1) - b1) * g;
                v[k] = b2 * v[k] + (T(1) - b2) * g * g;
                const T m_hat = m[k] / corr1;
                const T v_hat = v[k] / corr2;
                p.value[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
            }
        }
    }

    void sgd_step() {
        const T lr = static_cast<T>(cfg_.learning_rate);
        const T mom = static_cast<T>(cfg_.momentum);
        for (std::size_t pi = 0; pi < params_.size(); ++pi) {
            Parameter<T>& p = *params_[pi];
            Tensor<T>& vel = slot_a_[pi];
            for (std::size_t k = p.frozen_prefix; k < p.value.size(); ++k) {
                vel[k] = mom * vel[k] - lr * p.grad[k];
                p.value[k] += vel[k];
            }
        }
    }

    OptimizerConfig cfg_;
    std::vector<Parameter<T>*> params_;
    std::vector<Tensor<T>> slot_a_;  // adam first moment / sgd velocity
    std::vector<Tensor<T>> slot_b_;  // adam second moment
    int t_ = 0;
};

}  // namespace capgen::nn
