#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "capgen/errors.hpp"

namespace capgen {

// Dense n-dimensional array, row-major, owning its storage.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
        data_.assign(count(shape_), T{});
    }

    Tensor(std::vector<std::size_t> shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != count(shape_))
            throw ShapeMismatch("tensor data length " + std::to_string(data_.size()) + " != shape product " +
                                std::to_string(count(shape_)));
    }

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<std::size_t> shape, T value) {
        Tensor t(std::move(shape));
        for (auto& v : t.data_) v = value;
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t ndim() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_[i]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& values() { return data_; }
    const std::vector<T>& values() const { return data_; }

    T& operator[](std::size_t flat) { return data_[flat]; }
    const T& operator[](std::size_t flat) const { return data_[flat]; }

    T& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    const T& at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    T& at(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * shape_[1] + j) * shape_[2] + k]; }
    const T& at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    // Pointer to row j of the 2-D slice i (3-D tensors) or row i (2-D tensors).
    T* row(std::size_t i) { return data_.data() + i * shape_.back(); }
    const T* row(std::size_t i) const { return data_.data() + i * shape_.back(); }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool operator==(const Tensor& other) const = default;

    std::string shape_str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape_[i]);
        }
        return s + ")";
    }

    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;
using IndexTensor = Tensor<std::int32_t>;

// ---- shape guards ----

template <typename T>
void require_ndim(const Tensor<T>& t, std::size_t n, const char* what) {
    if (t.ndim() != n)
        throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(n) + "-d tensor, got " +
                            t.shape_str());
}

// ---- matrix kernels (all 2-D, row-major) ----

// C = A * B^T, A:(m,k) B:(n,k) -> C:(m,n)
template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
    require_ndim(a, 2, "matmul_nt lhs");
    require_ndim(b, 2, "matmul_nt rhs");
    if (a.dim(1) != b.dim(1))
        throw ShapeMismatch("matmul_nt: inner dims " + a.shape_str() + " vs " + b.shape_str());
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
    Tensor<T> c({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        const T* ai = a.row(i);
        T* ci = c.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            const T* bj = b.row(j);
            T acc{};
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] = acc;
        }
    }
    return c;
}

// C = A * B, A:(m,k) B:(k,n) -> C:(m,n)
template <typename T>
Tensor<T> matmul_nn(const Tensor<T>& a, const Tensor<T>& b) {
    require_ndim(a, 2, "matmul_nn lhs");
    require_ndim(b, 2, "matmul_nn rhs");
    if (a.dim(1) != b.dim(0))
        throw ShapeMismatch("matmul_nn: inner dims " + a.shape_str() + " vs " + b.shape_str());
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor<T> c({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        const T* ai = a.row(i);
        T* ci = c.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const T av = ai[p];
            if (av == T{}) continue;
            const T* bp = b.row(p);
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
    return c;
}

// C += A^T * B, A:(k,m) B:(k,n) -> C:(m,n); accumulating form used for weight grads.
template <typename T>
void matmul_tn_accum(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
    require_ndim(a, 2, "matmul_tn lhs");
    require_ndim(b, 2, "matmul_tn rhs");
    if (a.dim(0) != b.dim(0))
        throw ShapeMismatch("matmul_tn: outer dims " + a.shape_str() + " vs " + b.shape_str());
    const std::size_t k = a.dim(0), m = a.dim(1), n = b.dim(1);
    if (c.ndim() != 2 || c.dim(0) != m || c.dim(1) != n)
        throw ShapeMismatch("matmul_tn: output shape " + c.shape_str());
    for (std::size_t p = 0; p < k; ++p) {
        const T* ap = a.row(p);
        const T* bp = b.row(p);
        for (std::size_t i = 0; i < m; ++i) {
            const T av = ap[i];
            if (av == T{}) continue;
            T* ci = c.row(i);
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

template <typename T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("add: " + a.shape_str() + " vs " + b.shape_str());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

template <typename T>
Tensor<T> hadamard(const Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("hadamard: " + a.shape_str() + " vs " + b.shape_str());
    Tensor<T> c(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * b[i];
    return c;
}

}  // namespace capgen
