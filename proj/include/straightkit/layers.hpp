#pragma once

#include <string>
#include <vector>

#include "straightkit/kernels.hpp"
#include "straightkit/tensor.hpp"

namespace straightkit {

// A named view onto one parameter tensor and its gradient buffer.
template <typename T>
struct ParamRef {
    std::string name;
    std::vector<int> shape;
    std::vector<T>* data;
    std::vector<T>* grad;
};

template <typename T>
using ParamSet = std::vector<ParamRef<T>>;

template <typename T>
struct Conv2d {
    int in_ch = 0, out_ch = 0, k = 4, stride = 2, pad = 1;
    TensorT<T> w;
    std::vector<T> b;
    TensorT<T> gw;
    std::vector<T> gb;
    TensorT<T> saved_in;

    Conv2d() = default;
    Conv2d(int ic, int oc, int k_, int s, int p) : in_ch(ic), out_ch(oc), k(k_), stride(s), pad(p) {
        w = TensorT<T>(oc, ic, k_, k_);
        gw = TensorT<T>(oc, ic, k_, k_);
        b.assign(oc, T(0));
        gb.assign(oc, T(0));
    }

    void init(Rng& rng, double stddev) {
        for (T& v : w.v) v = static_cast<T>(rng.normal(0.0, stddev));
        std::fill(b.begin(), b.end(), T(0));
    }

    TensorT<T> forward(const TensorT<T>& x) {
        if (x.c != in_ch) throw DataError("convolution channel mismatch");
        const int oh = kernels::conv_out_dim(x.h, k, stride, pad);
        const int ow = kernels::conv_out_dim(x.w, k, stride, pad);
        if (oh < 1 || ow < 1) throw DataError("input too small for convolution stack");
        saved_in = x;
        TensorT<T> out(x.n, out_ch, oh, ow);
        kernels::conv2d_forward(x, w, b, stride, pad, out);
        return out;
    }

    TensorT<T> backward(const TensorT<T>& gout) {
        kernels::conv2d_backward_params(saved_in, gout, stride, pad, gw, gb);
        TensorT<T> gin(saved_in.n, saved_in.c, saved_in.h, saved_in.w);
        kernels::conv2d_backward_input(gout, w, stride, pad, gin);
        return gin;
    }

    void zero_grad() {
        gw.fill(T(0));
        std::fill(gb.begin(), gb.end(), T(0));
    }

    void collect(const std::string& prefix, ParamSet<T>& out) {
        out.push_back({prefix + ".w", {out_ch, in_ch, k, k}, &w.v, &gw.v});
        out.push_back({prefix + ".b", {out_ch}, &b, &gb});
    }
};

template <typename T>
struct ConvT2d {
    int in_ch = 0, out_ch = 0, k = 4, stride = 2, pad = 1;
    TensorT<T> w;  // [in_ch][out_ch][k][k]
    std::vector<T> b;
    TensorT<T> gw;
    std::vector<T> gb;
    TensorT<T> saved_in;

    ConvT2d() = default;
    ConvT2d(int ic, int oc, int k_, int s, int p) : in_ch(ic), out_ch(oc), k(k_), stride(s), pad(p) {
        w = TensorT<T>(ic, oc, k_, k_);
        gw = TensorT<T>(ic, oc, k_, k_);
        b.assign(oc, T(0));
        gb.assign(oc, T(0));
    }

    void init(Rng& rng, double stddev) {
        for (T& v : w.v) v = static_cast<T>(rng.normal(0.0, stddev));
        std::fill(b.begin(), b.end(), T(0));
    }

    TensorT<T> forward(const TensorT<T>& x) {
        saved_in = x;
        TensorT<T> out(x.n, out_ch, kernels::convt_out_dim(x.h, k, stride, pad),
                       kernels::convt_out_dim(x.w, k, stride, pad));
        kernels::convt2d_forward(x, w, b, stride, pad, out);
        return out;
    }

    TensorT<T> backward(const TensorT<T>& gout) {
        kernels::convt2d_backward_params(saved_in, gout, stride, pad, gw, gb);
        TensorT<T> gin(saved_in.n, saved_in.c, saved_in.h, saved_in.w);
        kernels::convt2d_backward_input(gout, w, stride, pad, gin);
        return gin;
    }

    void zero_grad() {
        gw.fill(T(0));
        std::fill(gb.begin(), gb.end(), T(0));
    }

    void collect(const std::string& prefix, ParamSet<T>& out) {
        out.push_back({prefix + ".w", {in_ch, out_ch, k, k}, &w.v, &gw.v});
        out.push_back({prefix + ".b", {out_ch}, &b, &gb});
    }
};

template <typename T>
struct LeakyReLU {
    double slope = 0.2;
    TensorT<T> saved_in;

    TensorT<T> forward(const TensorT<T>& x) {
        saved_in = x;
        TensorT<T> out = x;
        for (T& v : out.v)
            if (v < T(0)) v = static_cast<T>(slope * v);
        return out;
    }
    TensorT<T> backward(const TensorT<T>& g) {
        TensorT<T> gin = g;
        for (size_t i = 0; i < gin.v.size(); ++i)
            if (saved_in.v[i] < T(0)) gin.v[i] = static_cast<T>(slope * gin.v[i]);
        return gin;
    }
};

template <typename T>
struct ReLU {
    TensorT<T> saved_in;

    TensorT<T> forward(const TensorT<T>& x) {
        saved_in = x;
        TensorT<T> out = x;
        for (T& v : out.v)
            if (v < T(0)) v = T(0);
        return out;
    }
    TensorT<T> backward(const TensorT<T>& g) {
        TensorT<T> gin = g;
        for (size_t i = 0; i < gin.v.size(); ++i)
            if (saved_in.v[i] < T(0)) gin.v[i] = T(0);
        return gin;
    }
};

template <typename T>
struct Tanh {
    TensorT<T> saved_out;

    TensorT<T> forward(const TensorT<T>& x) {
        TensorT<T> out = x;
        for (T& v : out.v) v = std::tanh(v);
        saved_out = out;
        return out;
    }
    TensorT<T> backward(const TensorT<T>& g) {
        TensorT<T> gin = g;
        for (size_t i = 0; i < gin.v.size(); ++i)
            gin.v[i] *= T(1) - saved_out.v[i] * saved_out.v[i];
        return gin;
    }
};

// Per-sample, per-channel normalization with learnable affine. Keeps the
// conditioning signal alive through deep stacks regardless of weight scale
// and is independent of batch composition, so training stays deterministic.
template <typename T>
struct InstanceNorm2d {
    int channels = 0;
    double eps = 1e-5;
    std::vector<T> gamma, beta;
    std::vector<T> ggamma, gbeta;
    TensorT<T> saved_xhat;
    std::vector<T> saved_inv_std;  // one per (n, c) plane

    InstanceNorm2d() = default;
    explicit InstanceNorm2d(int ch) : channels(ch) {
        gamma.assign(ch, T(1));
        beta.assign(ch, T(0));
        ggamma.assign(ch, T(0));
        gbeta.assign(ch, T(0));
    }

    void init(Rng& rng, double stddev) {
        for (T& g : gamma) g = static_cast<T>(1.0 + rng.normal(0.0, stddev));
        std::fill(beta.begin(), beta.end(), T(0));
    }

    TensorT<T> forward(const TensorT<T>& x) {
        const size_t plane = static_cast<size_t>(x.h) * x.w;
        saved_xhat = TensorT<T>(x.n, x.c, x.h, x.w);
        saved_inv_std.assign(static_cast<size_t>(x.n) * x.c, T(0));
        TensorT<T> out(x.n, x.c, x.h, x.w);
        const long planes = static_cast<long>(x.n) * x.c;
#pragma omp parallel for schedule(static) if (planes* plane >= 4096)
        for (long p = 0; p < planes; ++p) {
            const int c = static_cast<int>(p % x.c);
            const T* src = &x.v[p * plane];
            T* xhat = &saved_xhat.v[p * plane];
            T* dst = &out.v[p * plane];
            double mean = 0.0;
            for (size_t i = 0; i < plane; ++i) mean += src[i];
            mean /= static_cast<double>(plane);
            double var = 0.0;
            for (size_t i = 0; i < plane; ++i) {
                const double d = src[i] - mean;
                var += d * d;
            }
            var /= static_cast<double>(plane);
            const double inv_std = 1.0 / std::sqrt(var + eps);
            saved_inv_std[p] = static_cast<T>(inv_std);
            for (size_t i = 0; i < plane; ++i) {
                xhat[i] = static_cast<T>((src[i] - mean) * inv_std);
                dst[i] = gamma[c] * xhat[i] + beta[c];
            }
        }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& g) {
        const size_t plane = static_cast<size_t>(g.h) * g.w;
        TensorT<T> gin(g.n, g.c, g.h, g.w);
        for (long p = 0; p < static_cast<long>(g.n) * g.c; ++p) {
            const int c = static_cast<int>(p % g.c);
            const T* gr = &g.v[p * plane];
            const T* xhat = &saved_xhat.v[p * plane];
            double sum_g = 0.0, sum_gx = 0.0;
            for (size_t i = 0; i < plane; ++i) {
                sum_g += gr[i];
                sum_gx += gr[i] * static_cast<double>(xhat[i]);
            }
            gbeta[c] += static_cast<T>(sum_g);
            ggamma[c] += static_cast<T>(sum_gx);
            const double m = static_cast<double>(plane);
            const double scale = gamma[c] * static_cast<double>(saved_inv_std[p]);
            T* out = &gin.v[p * plane];
            for (size_t i = 0; i < plane; ++i)
                out[i] = static_cast<T>(scale * (gr[i] - sum_g / m - xhat[i] * sum_gx / m));
        }
        return gin;
    }

    void zero_grad() {
        std::fill(ggamma.begin(), ggamma.end(), T(0));
        std::fill(gbeta.begin(), gbeta.end(), T(0));
    }

    void collect(const std::string& prefix, ParamSet<T>& out) {
        out.push_back({prefix + ".gamma", {channels}, &gamma, &ggamma});
        out.push_back({prefix + ".beta", {channels}, &beta, &gbeta});
    }
};

// Inverted dropout; the mask can be pinned for gradient checks.
template <typename T>
struct Dropout {
    double rate = 0.5;
    std::vector<uint8_t> mask;
    bool active = false;

    TensorT<T> forward(const TensorT<T>& x, bool training, Rng* rng) {
        active = training && rate > 0.0;
        if (!active) return x;
        if (rng) {  // without an rng the previous mask stays pinned (gradient checks)
            mask.resize(x.v.size());
            for (auto& m : mask) m = rng->uniform01() >= rate ? 1 : 0;
        }
        TensorT<T> out = x;
        const T scale = static_cast<T>(1.0 / (1.0 - rate));
        for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = mask[i] ? out.v[i] * scale : T(0);
        return out;
    }
    TensorT<T> backward(const TensorT<T>& g) {
        if (!active) return g;
        TensorT<T> gin = g;
        const T scale = static_cast<T>(1.0 / (1.0 - rate));
        for (size_t i = 0; i < gin.v.size(); ++i) gin.v[i] = mask[i] ? gin.v[i] * scale : T(0);
        return gin;
    }
};

}  // namespace straightkit
