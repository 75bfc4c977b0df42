#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "capgen/rng.hpp"
#include "capgen/tensor.hpp"

namespace capgen::nn {

enum class Activation { linear, relu, softmax };
enum class Mode { train, infer };

// Trainable tensor with its gradient. `frozen_prefix` marks leading flat
// components that are never updated or gradient-checked (the embedding uses
// it to keep the padding row inert).
template <typename T>
struct Parameter {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    std::size_t frozen_prefix = 0;

    void reset(std::string param_name, std::vector<std::size_t> shape) {
        name = std::move(param_name);
        value = Tensor<T>(shape);
        grad = Tensor<T>(std::move(shape));
    }

    void zero_grad() {
        for (auto& g : grad.values()) g = T{};
    }
};

template <typename T>
void glorot_uniform(Tensor<T>& w, std::size_t fan_in, std::size_t fan_out, rng::Stream& stream) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : w.values()) v = static_cast<T>((stream.next_u01() * 2.0 - 1.0) * limit);
}

template <typename T>
T sigmoid(T x) {
    if (x >= T{}) return T(1) / (T(1) + std::exp(-x));
    T e = std::exp(x);
    return e / (T(1) + e);
}

// Row-wise stable softmax; sums are accumulated in double so wide rows still
// normalize to 1 within 1e-6.
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
    require_ndim(logits, 2, "softmax");
    const std::size_t rows = logits.dim(0), cols = logits.dim(1);
    Tensor<T> probs(logits.shape());
    std::vector<double> e(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const T* x = logits.row(i);
        T* p = probs.row(i);
        T m = x[0];
        for (std::size_t j = 1; j < cols; ++j)
            if (x[j] > m) m = x[j];
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            e[j] = std::exp(static_cast<double>(x[j] - m));
            sum += e[j];
        }
        for (std::size_t j = 0; j < cols; ++j) p[j] = static_cast<T>(e[j] / sum);
    }
    return probs;
}

// ---- dense layer: y = act(x W^T + b) ----

template <typename T>
struct Dense {
    Parameter<T> W;  // (out, in)
    Parameter<T> b;  // (out)
    Activation act = Activation::linear;

    struct Cache {
        Tensor<T> x;  // input as seen by forward
        Tensor<T> y;  // post-activation output
    };

    void reset(const std::string& name, std::size_t out, std::size_t in, Activation activation) {
        W.reset(name + ".W", {out, in});
        b.reset(name + ".b", {out});
        act = activation;
    }

    std::size_t in_dim() const { return W.value.dim(1); }
    std::size_t out_dim() const { return W.value.dim(0); }

    Tensor<T> forward(const Tensor<T>& x, Cache* cache = nullptr) const {
        require_ndim(x, 2, "dense input");
        if (x.dim(1) != in_dim())
            throw ShapeMismatch("dense '" + W.name + "': input " + x.shape_str() + " vs weight " +
                                W.value.shape_str());
        Tensor<T> y = matmul_nt(x, W.value);
        const std::size_t rows = y.dim(0), cols = y.dim(1);
        for (std::size_t i = 0; i < rows; ++i) {
            T* yi = y.row(i);
            for (std::size_t j = 0; j < cols; ++j) yi[j] += b.value[j];
        }
        if (act == Activation::relu) {
            for (auto& v : y.values())
                if (v < T{}) v = T{};
        } else if (act == Activation::softmax) {
            y = softmax_rows(y);
        }
        if (cache) {
            cache->x = x;
            cache->y = y;
        }
        return y;
    }

    // dy is the gradient w.r.t. the activated output. For the softmax route
    // this applies the exact Jacobian product; the fused cross-entropy path
    // uses backward_preact instead.
    Tensor<T> backward(const Cache& cache, const Tensor<T>& dy, bool need_dx = true) {
        if (!dy.same_shape(cache.y))
            throw ShapeMismatch("dense '" + W.name + "' backward: dy " + dy.shape_str() + " vs y " +
                                cache.y.shape_str());
        Tensor<T> da = dy;
        const std::size_t rows = dy.dim(0), cols = dy.dim(1);
        if (act == Activation::relu) {
            for (std::size_t k = 0; k < da.size(); ++k)
                if (cache.y[k] <= T{}) da[k] = T{};
        } else if (act == Activation::softmax) {
            for (std::size_t i = 0; i < rows; ++i) {
                const T* p = cache.y.row(i);
                T* d = da.row(i);
                T dot{};
                for (std::size_t j = 0; j < cols; ++j) dot += d[j] * p[j];
                for (std::size_t j = 0; j < cols; ++j) d[j] = p[j] * (d[j] - dot);
            }
        }
        return backward_preact(cache, da, need_dx);
    }

    // da is the gradient w.r.t. the pre-activation x W^T + b.
    Tensor<T> backward_preact(const Cache& cache, const Tensor<T>& da, bool need_dx = true) {
        matmul_tn_accum(da, cache.x, W.grad);
        const std::size_t rows = da.dim(0), cols = da.dim(1);
        for (std::size_t i = 0; i < rows; ++i) {
            const T* d = da.row(i);
            for (std::size_t j = 0; j < cols; ++j) b.grad[j] += d[j];
        }
        if (!need_dx) return Tensor<T>();
        return matmul_nn(da, W.value);
    }
};

// ---- embedding lookup ----

template <typename T>
struct Embedding {
    Parameter<T> table;  // (vocab, embed); row 0 is the inert padding row

    void reset(const std::string& name, std::size_t vocab, std::size_t embed) {
        table.reset(name, {vocab, embed});
        table.frozen_prefix = embed;
    }

    std::size_t vocab_size() const { return table.value.dim(0); }
    std::size_t embed_dim() const { return table.value.dim(1); }

    // indices: (B, T) -> (B, T, embed)
    Tensor<T> forward(const IndexTensor& indices) const {
        require_ndim(indices, 2, "embedding indices");
        const std::size_t batch = indices.dim(0), steps = indices.dim(1), embed = embed_dim();
        Tensor<T> out({batch, steps, embed});
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t t = 0; t < steps; ++t) {
                std::int32_t idx = indices.at(b, t);
                if (idx < 0 || static_cast<std::size_t>(idx) >= vocab_size())
                    throw IndexOutOfRange("embedding index " + std::to_string(idx) + " outside vocab of " +
                                          std::to_string(vocab_size()));
                const T* src = table.value.row(static_cast<std::size_t>(idx));
                T* dst = &out.at(b, t, 0);
                for (std::size_t k = 0; k < embed; ++k) dst[k] = src[k];
            }
        }
        return out;
    }

    // Accumulates dout rows into the gradient of their looked-up table rows;
    // contributions to the padding row are dropped.
    void backward(const IndexTensor& indices, const Tensor<T>& dout) {
        const std::size_t batch = indices.dim(0), steps = indices.dim(1), embed = embed_dim();
        if (dout.ndim() != 3 || dout.dim(0) != batch || dout.dim(1) != steps || dout.dim(2) != embed)
            throw ShapeMismatch("embedding backward: dout " + dout.shape_str());
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t t = 0; t < steps; ++t) {
                std::int32_t idx = indices.at(b, t);
                if (idx == 0) continue;
                T* dst = table.grad.row(static_cast<std::size_t>(idx));
                const T* src = &dout.at(b, t, 0);
                for (std::size_t k = 0; k < embed; ++k) dst[k] += src[k];
            }
        }
    }
};

// ---- inverted dropout ----

template <typename T>
struct Dropout {
    double rate = 0.5;

    // Train mode zeroes each component with probability `rate` and scales
    // survivors by 1/(1-rate); the mask is a pure function of (key, index) so
    // backward replays it exactly. Infer mode is the identity.
    Tensor<T> forward(const Tensor<T>& x, Mode mode, std::uint64_t key, Tensor<T>* mask_out = nullptr) const {
        if (mode == Mode::infer) {
            if (mask_out) *mask_out = Tensor<T>::full(x.shape(), T(1));
            return x;
        }
        const T scale = static_cast<T>(1.0 / (1.0 - rate));
        Tensor<T> mask(x.shape());
        Tensor<T> out(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const bool keep = rng::u01(rng::splitmix64(key + rng::kGolden * (i + 1))) >= rate;
            mask[i] = keep ? scale : T{};
            out[i] = x[i] * mask[i];
        }
        if (mask_out) *mask_out = std::move(mask);
        return out;
    }

    static Tensor<T> backward(const Tensor<T>& mask, const Tensor<T>& dy) { return hadamard(dy, mask); }
};

// ---- merge by addition ----

template <typename T>
Tensor<T> add_merge(const Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("add_merge: " + a.shape_str() + " vs " + b.shape_str());
    Tensor<T> c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
    return c;
}

// ---- categorical cross-entropy over softmaxed rows ----

inline constexpr double kProbFloor = 1e-12;

template <typename T>
double cross_entropy(const Tensor<T>& probs, std::span<const std::int32_t> targets) {
    require_ndim(probs, 2, "cross_entropy probs");
    if (targets.size() != probs.dim(0))
        throw ShapeMismatch("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                            std::to_string(probs.dim(0)) + " rows");
    const std::size_t cols = probs.dim(1);
    double sum = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        std::int32_t t = targets[i];
        if (t < 0 || static_cast<std::size_t>(t) >= cols)
            throw IndexOutOfRange("cross_entropy target " + std::to_string(t) + " outside vocab of " +
                                  std::to_string(cols));
        double p = static_cast<double>(probs.row(i)[t]);
        if (p < kProbFloor) p = kProbFloor;
        sum -= std::log(p);
    }
    return sum / static_cast<double>(targets.size());
}

// Fused softmax+cross-entropy gradient w.r.t. the logits:
// (probs - onehot(target)) / batch.
template <typename T>
Tensor<T> softmax_xent_grad(const Tensor<T>& probs, std::span<const std::int32_t> targets) {
    require_ndim(probs, 2, "softmax_xent_grad probs");
    if (targets.size() != probs.dim(0))
        throw ShapeMismatch("softmax_xent_grad: " + std::to_string(targets.size()) + " targets for " +
                            std::to_string(probs.dim(0)) + " rows");
    const T inv_batch = T(1) / static_cast<T>(probs.dim(0));
    Tensor<T> grad = probs;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        std::int32_t t = targets[i];
        if (t < 0 || static_cast<std::size_t>(t) >= probs.dim(1))
            throw IndexOutOfRange("softmax_xent_grad target " + std::to_string(t) + " outside vocab of " +
                                  std::to_string(probs.dim(1)));
        grad.row(i)[t] -= T(1);
    }
    for (auto& g : grad.values()) g *= inv_batch;
    return grad;
}

}  // namespace capgen::nn
