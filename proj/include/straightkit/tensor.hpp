#pragma once

#include <cstddef>
#include <vector>

#include "straightkit/common.hpp"
#include "straightkit/image.hpp"

namespace straightkit {

// Batched (n, c, h, w) array, row-major. Float in production; the
// gradient-check tests instantiate the double variant.
template <typename T>
struct TensorT {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> v;

    TensorT() = default;
    TensorT(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_), v(static_cast<size_t>(n_) * c_ * h_ * w_, T(0)) {}

    size_t size() const { return v.size(); }
    bool same_shape(const TensorT& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }

    T& at(int in, int ic, int iy, int ix) {
        return v[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
    }
    T at(int in, int ic, int iy, int ix) const {
        return v[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
    }

    void fill(T x) { std::fill(v.begin(), v.end(), x); }
};

using Tensor = TensorT<float>;

// Concatenate two tensors along the channel axis.
template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b) {
    TensorT<T> out(a.n, a.c + b.c, a.h, a.w);
    size_t plane = static_cast<size_t>(a.h) * a.w;
    for (int in = 0; in < a.n; ++in) {
        std::copy(a.v.begin() + static_cast<size_t>(in) * a.c * plane,
                  a.v.begin() + static_cast<size_t>(in + 1) * a.c * plane,
                  out.v.begin() + static_cast<size_t>(in) * (a.c + b.c) * plane);
        std::copy(b.v.begin() + static_cast<size_t>(in) * b.c * plane,
                  b.v.begin() + static_cast<size_t>(in + 1) * b.c * plane,
                  out.v.begin() + static_cast<size_t>(in) * (a.c + b.c) * plane + a.c * plane);
    }
    return out;
}

// Split the channel-concat gradient back into the two operands.
template <typename T>
void split_channels(const TensorT<T>& g, TensorT<T>& ga, TensorT<T>& gb) {
    size_t plane = static_cast<size_t>(g.h) * g.w;
    for (int in = 0; in < g.n; ++in) {
        auto base = g.v.begin() + static_cast<size_t>(in) * g.c * plane;
        std::copy(base, base + static_cast<size_t>(ga.c) * plane,
                  ga.v.begin() + static_cast<size_t>(in) * ga.c * plane);
        std::copy(base + static_cast<size_t>(ga.c) * plane, base + static_cast<size_t>(g.c) * plane,
                  gb.v.begin() + static_cast<size_t>(in) * gb.c * plane);
    }
}

// (v - 0.5) / 0.5 into model range; one image per batch slot.
template <typename T>
void image_to_tensor(const GrayImage& img, TensorT<T>& t, int batch_index) {
    size_t plane = static_cast<size_t>(t.h) * t.w;
    for (size_t i = 0; i < plane; ++i)
        t.v[static_cast<size_t>(batch_index) * t.c * plane + i] =
            static_cast<T>(2.0 * img.data[i] - 1.0);
}

template <typename T>
GrayImage tensor_to_image(const TensorT<T>& t, int batch_index) {
    GrayImage img(t.w, t.h);
    size_t plane = static_cast<size_t>(t.h) * t.w;
    for (size_t i = 0; i < plane; ++i) {
        double v = 0.5 * static_cast<double>(t.v[static_cast<size_t>(batch_index) * t.c * plane + i]) + 0.5;
        img.data[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    return img;
}

}  // namespace straightkit
