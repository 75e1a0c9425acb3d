#pragma once

#include <stdexcept>

#include "straightkit/layers.hpp"

namespace straightkit {

// U-shape encoder/decoder with skip connections between mirror levels.
// Encoder: stride-2 convolutions, instance norm (except the first level),
// LeakyReLU. Decoder: mirrored transposed convolutions with instance norm
// and ReLU, dropout in the innermost levels (the network's only noise
// source), and a final tanh.
template <typename T>
struct UNetT {
    int depth = 4;
    int base = 16;
    int in_ch = 1, out_ch = 1;
    double dropout_rate = 0.5;

    std::vector<Conv2d<T>> enc;
    std::vector<ConvT2d<T>> dec;  // dec[l] produces level l-1; dec[0] is the output layer
    std::vector<InstanceNorm2d<T>> enc_norm;  // enc_norm[l] used for l >= 1
    std::vector<InstanceNorm2d<T>> dec_norm;  // dec_norm[l] used for l >= 1
    std::vector<LeakyReLU<T>> enc_act;
    std::vector<ReLU<T>> dec_act;
    std::vector<Dropout<T>> drops;
    Tanh<T> out_act;

    // saved forward state
    std::vector<TensorT<T>> e_out;
    std::vector<int> concat_split;  // channels of u at each level

    UNetT() = default;
    UNetT(int depth_, int base_, double dropout) : depth(depth_), base(base_), dropout_rate(dropout) {
        if (depth < 2) throw std::invalid_argument("U-net depth must be >= 2");
        enc.reserve(depth);
        enc_norm.resize(depth);
        dec_norm.resize(depth);
        for (int l = 0; l < depth; ++l) {
            enc.emplace_back(l == 0 ? in_ch : ch(l - 1), ch(l), 4, 2, 1);
            if (l >= 1) enc_norm[l] = InstanceNorm2d<T>(ch(l));
        }
        dec.resize(depth);
        for (int l = depth - 1; l >= 1; --l) {
            dec[l] = ConvT2d<T>(l == depth - 1 ? ch(l) : 2 * ch(l), ch(l - 1), 4, 2, 1);
            dec_norm[l] = InstanceNorm2d<T>(ch(l - 1));
        }
        dec[0] = ConvT2d<T>(2 * ch(0), out_ch, 4, 2, 1);
        enc_act.resize(depth);
        dec_act.resize(depth);
        drops.resize(depth);
        for (auto& d : drops) d.rate = dropout_rate;
    }

    int ch(int level) const { return base << level; }
    bool has_dropout(int level) const { return level >= std::max(1, depth - 2); }

    void init(Rng& rng, double stddev = 0.02) {
        for (int l = 0; l < depth; ++l) {
            enc[l].init(rng, stddev);
            if (l >= 1) enc_norm[l].init(rng, stddev);
        }
        for (int l = 0; l < depth; ++l) {
            dec[l].init(rng, stddev);
            if (l >= 1) dec_norm[l].init(rng, stddev);
        }
    }

    // `rng` drives dropout masks and must be non-null when training.
    TensorT<T> forward(const TensorT<T>& x, bool training, Rng* rng) {
        if (x.c != in_ch) throw DataError("generator input channel mismatch");
        const int div = 1 << depth;
        if (x.h % div != 0 || x.w % div != 0 || x.h < div || x.w < div)
            throw DataError("generator input size must be divisible by 2^depth");
        e_out.assign(depth, {});
        concat_split.assign(depth, 0);

        TensorT<T> a = x;
        for (int l = 0; l < depth; ++l) {
            a = enc[l].forward(a);
            if (l >= 1) a = enc_norm[l].forward(a);
            a = enc_act[l].forward(a);
            e_out[l] = a;
        }
        TensorT<T> g = e_out[depth - 1];
        for (int l = depth - 1; l >= 1; --l) {
            TensorT<T> u = dec_act[l].forward(dec_norm[l].forward(dec[l].forward(g)));
            if (has_dropout(l)) u = drops[l].forward(u, training, rng);
            concat_split[l] = u.c;
            g = concat_channels(u, e_out[l - 1]);
        }
        return out_act.forward(dec[0].forward(g));
    }

    // Accumulates parameter gradients; returns the gradient w.r.t. the input.
    TensorT<T> backward(const TensorT<T>& gout) {
        std::vector<TensorT<T>> ge(depth);
        TensorT<T> gh = dec[0].backward(out_act.backward(gout));
        for (int l = 1; l <= depth - 1; ++l) {
            TensorT<T> gu(gh.n, concat_split[l], gh.h, gh.w);
            TensorT<T> gskip(gh.n, gh.c - concat_split[l], gh.h, gh.w);
            split_channels(gh, gu, gskip);
            accumulate(ge[l - 1], gskip);
            if (has_dropout(l)) gu = drops[l].backward(gu);
            gh = dec[l].backward(dec_norm[l].backward(dec_act[l].backward(gu)));
        }
        accumulate(ge[depth - 1], gh);
        TensorT<T> gin;
        for (int l = depth - 1; l >= 0; --l) {
            TensorT<T> g = enc_act[l].backward(ge[l]);
            if (l >= 1) g = enc_norm[l].backward(g);
            gin = enc[l].backward(g);
            if (l > 0) accumulate(ge[l - 1], gin);
        }
        return gin;
    }

    void zero_grad() {
        for (int l = 0; l < depth; ++l) {
            enc[l].zero_grad();
            dec[l].zero_grad();
            if (l >= 1) {
                enc_norm[l].zero_grad();
                dec_norm[l].zero_grad();
            }
        }
    }

    ParamSet<T> params() {
        ParamSet<T> out;
        for (int l = 0; l < depth; ++l) {
            enc[l].collect("enc" + std::to_string(l), out);
            if (l >= 1) enc_norm[l].collect("enc" + std::to_string(l) + ".norm", out);
        }
        for (int l = 0; l < depth; ++l) {
            dec[l].collect("dec" + std::to_string(l), out);
            if (l >= 1) dec_norm[l].collect("dec" + std::to_string(l) + ".norm", out);
        }
        return out;
    }

private:
    static void accumulate(TensorT<T>& dst, const TensorT<T>& src) {
        if (dst.v.empty()) {
            dst = src;
            return;
        }
        for (size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += src.v[i];
    }
};

// Patch-wise discriminator over the channel concatenation of condition and
// image: three stride-2 and two stride-1 convolutions ending in a 1-channel
// raw score map. Instance norm on the middle layers.
template <typename T>
struct PatchDiscriminatorT {
    int base = 16;
    std::vector<Conv2d<T>> convs;
    std::vector<InstanceNorm2d<T>> norms;  // norms[i] used for 1 <= i <= 3
    std::vector<LeakyReLU<T>> acts;

    explicit PatchDiscriminatorT(int base_ = 16) : base(base_) {
        convs.emplace_back(2, base, 4, 2, 1);
        convs.emplace_back(base, base * 2, 4, 2, 1);
        convs.emplace_back(base * 2, base * 4, 4, 2, 1);
        convs.emplace_back(base * 4, base * 8, 4, 1, 1);
        convs.emplace_back(base * 8, 1, 4, 1, 1);
        norms.resize(convs.size());
        for (size_t i = 1; i + 1 < convs.size(); ++i)
            norms[i] = InstanceNorm2d<T>(convs[i].out_ch);
        acts.resize(convs.size() - 1);
    }

    bool has_norm(size_t i) const { return i >= 1 && i + 1 < convs.size(); }

    void init(Rng& rng, double stddev = 0.02) {
        for (size_t i = 0; i < convs.size(); ++i) {
            convs[i].init(rng, stddev);
            if (has_norm(i)) norms[i].init(rng, stddev);
        }
    }

    TensorT<T> forward(const TensorT<T>& x, const TensorT<T>& y) {
        if (!x.same_shape(y)) throw DataError("discriminator input shape mismatch");
        return forward_joint(concat_channels(x, y));
    }

    TensorT<T> forward_joint(const TensorT<T>& xy) {
        TensorT<T> a = xy;
        for (size_t i = 0; i < convs.size(); ++i) {
            a = convs[i].forward(a);
            if (has_norm(i)) a = norms[i].forward(a);
            if (i + 1 < convs.size()) a = acts[i].forward(a);
        }
        return a;
    }

    // Returns the gradient w.r.t. the joint (concatenated) input.
    TensorT<T> backward(const TensorT<T>& gout) {
        TensorT<T> g = gout;
        for (size_t i = convs.size(); i-- > 0;) {
            if (i + 1 < convs.size()) g = acts[i].backward(g);
            if (has_norm(i)) g = norms[i].backward(g);
            g = convs[i].backward(g);
        }
        return g;
    }

    void zero_grad() {
        for (size_t i = 0; i < convs.size(); ++i) {
            convs[i].zero_grad();
            if (has_norm(i)) norms[i].zero_grad();
        }
    }

    ParamSet<T> params() {
        ParamSet<T> out;
        for (size_t i = 0; i < convs.size(); ++i) {
            convs[i].collect("d" + std::to_string(i), out);
            if (has_norm(i)) norms[i].collect("d" + std::to_string(i) + ".norm", out);
        }
        return out;
    }
};

using UNet = UNetT<float>;
using PatchDiscriminator = PatchDiscriminatorT<float>;

// ---------------------------------------------------------------------------
// Losses. Reductions run serially in index order with a double accumulator,
// so training totals are independent of thread count.
// ---------------------------------------------------------------------------

template <typename T>
double l1_mean(const TensorT<T>& pred, const TensorT<T>& target) {
    double acc = 0.0;
    for (size_t i = 0; i < pred.v.size(); ++i)
        acc += std::abs(static_cast<double>(pred.v[i]) - static_cast<double>(target.v[i]));
    return acc / static_cast<double>(pred.v.size());
}

// d/dpred of scale * mean|pred - target|.
template <typename T>
TensorT<T> l1_mean_grad(const TensorT<T>& pred, const TensorT<T>& target, double scale) {
    TensorT<T> g(pred.n, pred.c, pred.h, pred.w);
    const double s = scale / static_cast<double>(pred.v.size());
    for (size_t i = 0; i < pred.v.size(); ++i) {
        const double d = static_cast<double>(pred.v[i]) - static_cast<double>(target.v[i]);
        g.v[i] = static_cast<T>(d > 0 ? s : (d < 0 ? -s : 0.0));
    }
    return g;
}

// mean((d - target)^2), the least-squares GAN ingredient.
template <typename T>
double lsgan_mean_sq(const TensorT<T>& d, double target) {
    double acc = 0.0;
    for (const T& v : d.v) {
        const double e = static_cast<double>(v) - target;
        acc += e * e;
    }
    return acc / static_cast<double>(d.v.size());
}

template <typename T>
TensorT<T> lsgan_mean_sq_grad(const TensorT<T>& d, double target, double scale) {
    TensorT<T> g(d.n, d.c, d.h, d.w);
    const double s = 2.0 * scale / static_cast<double>(d.v.size());
    for (size_t i = 0; i < d.v.size(); ++i)
        g.v[i] = static_cast<T>(s * (static_cast<double>(d.v[i]) - target));
    return g;
}

// Least-squares adversarial loss with real->1, fake->0.
template <typename T>
double discriminator_loss(const TensorT<T>& d_real, const TensorT<T>& d_fake) {
    return lsgan_mean_sq(d_real, 1.0) + lsgan_mean_sq(d_fake, 0.0);
}

struct GeneratorLoss {
    double total = 0.0;
    double adversarial = 0.0;
    double l1 = 0.0;
};

template <typename T>
GeneratorLoss generator_loss(const TensorT<T>& d_fake, const TensorT<T>& y_pred,
                             const TensorT<T>& y, double lambda) {
    GeneratorLoss out;
    out.adversarial = lsgan_mean_sq(d_fake, 1.0);
    out.l1 = l1_mean(y_pred, y);
    out.total = out.adversarial + lambda * out.l1;
    return out;
}

}  // namespace straightkit
