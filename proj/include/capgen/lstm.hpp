#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "capgen/nn.hpp"
#include "capgen/tensor.hpp"

namespace capgen::nn {

template <typename T>
struct LstmState {
    std::vector<T> h;  // hidden state
    std::vector<T> c;  // cell state

    static LstmState zero(std::size_t hidden) { return {std::vector<T>(hidden), std::vector<T>(hidden)}; }
};

// Single-cell LSTM over the concatenated input x = [h_{t-1}; x_t]:
//   f = sigmoid(W_f x + b_f)    i = sigmoid(W_i x + b_i)
//   o = sigmoid(W_o x + b_o)    g = tanh(W_c x + b_c)
//   c_t = f * c_{t-1} + i * g   h_t = o * tanh(c_t)
template <typename T>
struct LstmCell {
    std::size_t hidden = 0;
    std::size_t input = 0;
    Parameter<T> w_f, w_i, w_o, w_c;  // (hidden, hidden+input)
    Parameter<T> b_f, b_i, b_o, b_c;  // (hidden)

    void reset(const std::string& name, std::size_t hidden_dim, std::size_t input_dim) {
        hidden = hidden_dim;
        input = input_dim;
        const std::vector<std::size_t> wshape{hidden, hidden + input};
        w_f.reset(name + ".W_f", wshape);
        w_i.reset(name + ".W_i", wshape);
        w_o.reset(name + ".W_o", wshape);
        w_c.reset(name + ".W_c", wshape);
        b_f.reset(name + ".b_f", {hidden});
        b_i.reset(name + ".b_i", {hidden});
        b_o.reset(name + ".b_o", {hidden});
        b_c.reset(name + ".b_c", {hidden});
    }

    LstmState<T> step(std::span<const T> x_t, const LstmState<T>& prev) const {
        if (x_t.size() != input || prev.h.size() != hidden || prev.c.size() != hidden)
            throw ShapeMismatch("lstm step: input " + std::to_string(x_t.size()) + ", state " +
                                std::to_string(prev.h.size()) + " for cell (" + std::to_string(hidden) + "," +
                                std::to_string(input) + ")");
        LstmState<T> next = LstmState<T>::zero(hidden);
        for (std::size_t j = 0; j < hidden; ++j) {
            const T f = sigmoid(gate_preact(w_f.value, b_f.value, j, prev.h, x_t));
            const T i = sigmoid(gate_preact(w_i.value, b_i.value, j, prev.h, x_t));
            const T o = sigmoid(gate_preact(w_o.value, b_o.value, j, prev.h, x_t));
            const T g = std::tanh(gate_preact(w_c.value, b_c.value, j, prev.h, x_t));
            next.c[j] = f * prev.c[j] + i * g;
            next.h[j] = o * std::tanh(next.c[j]);
        }
        return next;
    }

    struct SeqCache {
        std::size_t steps = 0;
        std::vector<Tensor<T>> xcat;    // per step: (B, hidden+input)
        std::vector<Tensor<T>> f, i, o, g;  // gate activations, (B, hidden)
        std::vector<Tensor<T>> c;       // post-step cell state
        std::vector<Tensor<T>> c_prev;  // cell state entering the step
        std::vector<Tensor<T>> tanh_c;
    };

    // x: (B, T, input); runs from the zero state and returns only the final
    // hidden state (B, hidden).
    Tensor<T> sequence_forward(const Tensor<T>& x, SeqCache* cache = nullptr) const {
        require_ndim(x, 3, "lstm input");
        if (x.dim(2) != input)
            throw ShapeMismatch("lstm: input feature dim " + std::to_string(x.dim(2)) + " != " +
                                std::to_string(input));
        const std::size_t batch = x.dim(0), steps = x.dim(1);
        if (steps == 0) throw ShapeMismatch("lstm: sequence length must be >= 1");
        if (cache) {
            cache->steps = steps;
            cache->xcat.resize(steps);
            cache->f.resize(steps);
            cache->i.resize(steps);
            cache->o.resize(steps);
            cache->g.resize(steps);
            cache->c.resize(steps);
            cache->c_prev.resize(steps);
            cache->tanh_c.resize(steps);
        }
        Tensor<T> h({batch, hidden});
        Tensor<T> c({batch, hidden});
        for (std::size_t t = 0; t < steps; ++t) {
            Tensor<T> xcat({batch, hidden + input});
            for (std::size_t bi = 0; bi < batch; ++bi) {
                T* row = xcat.row(bi);
                const T* hrow = h.row(bi);
                for (std::size_t k = 0; k < hidden; ++k) row[k] = hrow[k];
                const T* xrow = &x.at(bi, t, 0);
                for (std::size_t k = 0; k < input; ++k) row[hidden + k] = xrow[k];
            }
            Tensor<T> af = gate_preact_batch(w_f.value, b_f.value, xcat);
            Tensor<T> ai = gate_preact_batch(w_i.value, b_i.value, xcat);
            Tensor<T> ao = gate_preact_batch(w_o.value, b_o.value, xcat);
            Tensor<T> ag = gate_preact_batch(w_c.value, b_c.value, xcat);
            for (auto& v : af.values()) v = sigmoid(v);
            for (auto& v : ai.values()) v = sigmoid(v);
            for (auto& v : ao.values()) v = sigmoid(v);
            for (auto& v : ag.values()) v = std::tanh(v);

            Tensor<T> c_next({batch, hidden});
            Tensor<T> tanh_c({batch, hidden});
            Tensor<T> h_next({batch, hidden});
            for (std::size_t k = 0; k < c_next.size(); ++k) {
                c_next[k] = af[k] * c[k] + ai[k] * ag[k];
                tanh_c[k] = std::tanh(c_next[k]);
                h_next[k] = ao[k] * tanh_c[k];
            }
            if (cache) {
                cache->xcat[t] = std::move(xcat);
                cache->f[t] = std::move(af);
                cache->i[t] = std::move(ai);
                cache->o[t] = std::move(ao);
                cache->g[t] = std::move(ag);
                cache->c_prev[t] = c;
                cache->c[t] = c_next;
                cache->tanh_c[t] = std::move(tanh_c);
            }
            c = std::move(c_next);
            h = std::move(h_next);
        }
        return h;
    }

    // Backpropagation through time from the gradient of the final hidden
    // state. Accumulates into the 8 parameter gradients and returns the
    // gradient w.r.t. the full input sequence (B, T, input).
    Tensor<T> sequence_backward(const SeqCache& cache, const Tensor<T>& dh_final) {
        const std::size_t steps = cache.steps;
        const std::size_t batch = dh_final.dim(0);
        if (dh_final.ndim() != 2 || dh_final.dim(1) != hidden)
            throw ShapeMismatch("lstm backward: dh " + dh_final.shape_str());
        Tensor<T> dx({batch, steps, input});
        Tensor<T> dh = dh_final;
        Tensor<T> dc({batch, hidden});
        for (std::size_t ti = steps; ti-- > 0;) {
            const Tensor<T>& f = cache.f[ti];
            const Tensor<T>& i = cache.i[ti];
            const Tensor<T>& o = cache.o[ti];
            const Tensor<T>& g = cache.g[ti];
            const Tensor<T>& tanh_c = cache.tanh_c[ti];
            const Tensor<T>& c_prev = cache.c_prev[ti];

            Tensor<T> da_f({batch, hidden}), da_i({batch, hidden}), da_o({batch, hidden}), da_g({batch, hidden});
            for (std::size_t k = 0; k < dh.size(); ++k) {
                dc[k] += dh[k] * o[k] * (T(1) - tanh_c[k] * tanh_c[k]);
                da_o[k] = dh[k] * tanh_c[k] * o[k] * (T(1) - o[k]);
                da_f[k] = dc[k] * c_prev[k] * f[k] * (T(1) - f[k]);
                da_i[k] = dc[k] * g[k] * i[k] * (T(1) - i[k]);
                da_g[k] = dc[k] * i[k] * (T(1) - g[k] * g[k]);
            }
            matmul_tn_accum(da_f, cache.xcat[ti], w_f.grad);
            matmul_tn_accum(da_i, cache.xcat[ti], w_i.grad);
            matmul_tn_accum(da_o, cache.xcat[ti], w_o.grad);
            matmul_tn_accum(da_g, cache.xcat[ti], w_c.grad);
            accum_bias(da_f, b_f.grad);
            accum_bias(da_i, b_i.grad);
            accum_bias(da_o, b_o.grad);
            accum_bias(da_g, b_c.grad);

            Tensor<T> dxcat = matmul_nn(da_f, w_f.value);
            add_inplace(dxcat, matmul_nn(da_i, w_i.value));
            add_inplace(dxcat, matmul_nn(da_o, w_o.value));
            add_inplace(dxcat, matmul_nn(da_g, w_c.value));

            for (std::size_t bi = 0; bi < batch; ++bi) {
                const T* drow = dxcat.row(bi);
                T* dh_row = dh.row(bi);
                for (std::size_t k = 0; k < hidden; ++k) dh_row[k] = drow[k];
                T* dx_row = &dx.at(bi, ti, 0);
                for (std::size_t k = 0; k < input; ++k) dx_row[k] = drow[hidden + k];
            }
            for (std::size_t k = 0; k < dc.size(); ++k) dc[k] *= f[k];
        }
        return dx;
    }

    std::vector<Parameter<T>*> parameters() {
        return {&w_f, &b_f, &w_i, &b_i, &w_o, &b_o, &w_c, &b_c};
    }

private:
    T gate_preact(const Tensor<T>& w, const Tensor<T>& bias, std::size_t j, std::span<const T> h_prev,
                  std::span<const T> x_t) const {
        const T* row = w.row(j);
        T acc{};
        for (std::size_t k = 0; k < hidden; ++k) acc += row[k] * h_prev[k];
        for (std::size_t k = 0; k < input; ++k) acc += row[hidden + k] * x_t[k];
        return acc + bias[j];
    }

    static Tensor<T> gate_preact_batch(const Tensor<T>& w, const Tensor<T>& bias, const Tensor<T>& xcat) {
        Tensor<T> a = matmul_nt(xcat, w);
        const std::size_t rows = a.dim(0), cols = a.dim(1);
        for (std::size_t bi = 0; bi < rows; ++bi) {
            T* row = a.row(bi);
            for (std::size_t j = 0; j < cols; ++j) row[j] += bias[j];
        }
        return a;
    }

    static void accum_bias(const Tensor<T>& da, Tensor<T>& bgrad) {
        const std::size_t rows = da.dim(0), cols = da.dim(1);
        for (std::size_t bi = 0; bi < rows; ++bi) {
            const T* row = da.row(bi);
            for (std::size_t j = 0; j < cols; ++j) bgrad[j] += row[j];
        }
    }
};

}  // namespace capgen::nn
