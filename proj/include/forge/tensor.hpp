#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "forge/rng.hpp"

namespace forge::nn {

// Row-major 2-D tensor; vectors are (1, n).
template <typename T>
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<T> a;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, T(0)) {}

    T* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
    const T* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }
    T& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    T at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t count() const { return a.size(); }
    bool empty() const { return a.empty(); }
    void zero() { std::fill(a.begin(), a.end(), T(0)); }

    void gauss(Rng& rng, double stddev) {
        for (T& v : a) v = static_cast<T>(rng.normal() * stddev);
    }
    void fill(T v) { std::fill(a.begin(), a.end(), v); }

    Tensor<T>& operator+=(const Tensor<T>& o) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
        return *this;
    }
};

// y = W x + b with W (out, in), x (in), y (out); y may alias nothing
template <typename T>
inline void affine(const Tensor<T>& w, const Tensor<T>& b, const T* x, T* y) {
    for (int i = 0; i < w.rows; ++i) {
        const T* wr = w.row(i);
        T acc = b.empty() ? T(0) : b.a[static_cast<std::size_t>(i)];
        for (int j = 0; j < w.cols; ++j) acc += wr[j] * x[j];
        y[i] = acc;
    }
}

// dW += dy ⊗ x, db += dy, dx += W^T dy
template <typename T>
inline void affine_backward(const Tensor<T>& w, const T* x, const T* dy, Tensor<T>& dw,
                            Tensor<T>& db, T* dx) {
    for (int i = 0; i < w.rows; ++i) {
        T g = dy[i];
        if (g == T(0)) continue;
        T* dwr = dw.row(i);
        const T* wr = w.row(i);
        for (int j = 0; j < w.cols; ++j) {
            dwr[j] += g * x[j];
            if (dx) dx[j] += wr[j] * g;
        }
        if (!db.empty()) db.a[static_cast<std::size_t>(i)] += g;
    }
}

}  // namespace forge::nn
