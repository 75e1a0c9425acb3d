#pragma once

// Data-parallel inner loops of the pipeline. Every kernel here is
// parallelized over disjoint output elements with a fixed per-element
// accumulation order, so results are bitwise identical for any thread
// count. The kernels::serial namespace keeps plain single-threaded
// reference implementations; tests assert bitwise equality between the
// two and bench/ compares their throughput.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "straightkit/image.hpp"
#include "straightkit/tensor.hpp"

namespace straightkit::kernels {

// ---------------------------------------------------------------------------
// Image warps (backward mapping). map_y/map_x give, per output pixel, the
// absolute source coordinate to sample; out-of-bounds samples read as 0.
// ---------------------------------------------------------------------------

void warp_bilinear(const GrayImage& src, const std::vector<double>& map_y,
                   const std::vector<double>& map_x, GrayImage& dst);
void warp_nearest(const GrayImage& src, const std::vector<double>& map_y,
                  const std::vector<double>& map_x, GrayImage& dst);

// ---------------------------------------------------------------------------
// Stick-figure rasterization. Stick k (1-based) runs from points[k-1] to
// points[k] and covers the pixels within half_width of its segment
// (perpendicular), plus the rounded joint wedge at its far endpoint when
// another stick follows. Later sticks overwrite earlier ones.
// ---------------------------------------------------------------------------

struct StickPoint {
    double y, x;
};

void raster_sticks(const std::vector<StickPoint>& points, const std::vector<double>& values,
                   double half_width, GrayImage& dst);

// ---------------------------------------------------------------------------
// One parallel-thinning subiteration (Guo-Hall pass 0 or 1) on a 0/1 grid.
// All deletions are decided on the frozen input. Returns true if any pixel
// was removed.
// ---------------------------------------------------------------------------

bool thin_pass(const std::vector<uint8_t>& in, std::vector<uint8_t>& out, int width, int height,
               int parity);

// ---------------------------------------------------------------------------
// Convolution family. Weight layouts: conv2d w[oc][ic][ky][kx],
// conv_transpose2d w[ic][oc][ky][kx]. Backward kernels accumulate (+=)
// into the gradient buffers. Each output element is accumulated in a fixed
// loop order shared by the parallel and serial variants.
// ---------------------------------------------------------------------------

inline int conv_out_dim(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}
inline int convt_out_dim(int in, int k, int stride, int pad) {
    return (in - 1) * stride - 2 * pad + k;
}

namespace detail {

// One conv output row: out_row[ox] = bias + sum_{ci,ky,kx} in * w.
template <typename T>
inline void conv2d_row(const TensorT<T>& in, const TensorT<T>& w, const std::vector<T>& bias,
                       int stride, int pad, int n, int co, int oy, int out_w, T* out_row) {
    const int k = w.h, ic = w.c;
    const T b = bias.empty() ? T(0) : bias[co];
    for (int ox = 0; ox < out_w; ++ox) out_row[ox] = b;
    for (int ci = 0; ci < ic; ++ci) {
        const T* in_plane = &in.v[((static_cast<size_t>(n) * in.c + ci) * in.h) * in.w];
        const T* w_base = &w.v[((static_cast<size_t>(co) * ic + ci) * k) * k];
        for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= in.h) continue;
            const T* in_row = in_plane + static_cast<size_t>(iy) * in.w;
            const T* w_row = w_base + static_cast<size_t>(ky) * k;
            for (int kx = 0; kx < k; ++kx) {
                const T wv = w_row[kx];
                // valid ox range: 0 <= ox*stride - pad + kx < in.w
                int lo = 0;
                while (lo < out_w && lo * stride - pad + kx < 0) ++lo;
                int hi = out_w;
                while (hi > lo && (hi - 1) * stride - pad + kx >= in.w) --hi;
                const T* src = in_row - pad + kx;
                for (int ox = lo; ox < hi; ++ox) out_row[ox] += wv * src[ox * stride];
            }
        }
    }
}

// One conv input-gradient row; accumulation order over (co, ky, kx) per
// element, with the (ky, kx) pairs restricted to stride-compatible taps.
template <typename T>
inline void conv2d_gin_row(const TensorT<T>& gout, const TensorT<T>& w, int stride, int pad,
                           int n, int ci, int y, int in_w, T* gin_row) {
    const int k = w.h, oc = w.n, ic = w.c;
    for (int co = 0; co < oc; ++co) {
        const T* g_plane = &gout.v[((static_cast<size_t>(n) * oc + co) * gout.h) * gout.w];
        const T* w_base = &w.v[((static_cast<size_t>(co) * ic + ci) * k) * k];
        for (int ky = 0; ky < k; ++ky) {
            const int ty = y + pad - ky;
            if (ty < 0 || ty % stride != 0) continue;
            const int oy = ty / stride;
            if (oy >= gout.h) continue;
            const T* g_row = g_plane + static_cast<size_t>(oy) * gout.w;
            const T* w_row = w_base + static_cast<size_t>(ky) * k;
            for (int kx = 0; kx < k; ++kx) {
                // x + pad - kx = ox*stride with 0 <= ox < gout.w
                const int x0 = kx - pad;  // x where ox = 0
                int first = x0;
                while (first < 0) first += stride;
                const int last = std::min(in_w, x0 + gout.w * stride);
                const T wv = w_row[kx];
                int ox = (first - x0) / stride;
                for (int x = first; x < last; x += stride, ++ox)
                    gin_row[x] += g_row[ox] * wv;
            }
        }
    }
}

// One transposed-conv output row (also the conv input-gradient kernel with
// the roles of in/out swapped); order (ci, ky, kx) per element.
template <typename T>
inline void convt2d_row(const TensorT<T>& in, const TensorT<T>& w, const std::vector<T>& bias,
                        int stride, int pad, int n, int co, int y, int out_w, T* out_row) {
    const int k = w.h, ic = w.n, oc = w.c;
    const T b = bias.empty() ? T(0) : bias[co];
    for (int x = 0; x < out_w; ++x) out_row[x] = b;
    for (int ci = 0; ci < ic; ++ci) {
        const T* in_plane = &in.v[((static_cast<size_t>(n) * ic + ci) * in.h) * in.w];
        const T* w_base = &w.v[((static_cast<size_t>(ci) * oc + co) * k) * k];
        for (int ky = 0; ky < k; ++ky) {
            const int ty = y + pad - ky;
            if (ty < 0 || ty % stride != 0) continue;
            const int iy = ty / stride;
            if (iy >= in.h) continue;
            const T* in_row = in_plane + static_cast<size_t>(iy) * in.w;
            const T* w_row = w_base + static_cast<size_t>(ky) * k;
            for (int kx = 0; kx < k; ++kx) {
                const T wv = w_row[kx];
                const int x0 = kx - pad;  // x where ix = 0
                int first = x0;
                while (first < 0) first += stride;
                const int last = std::min(out_w, x0 + in.w * stride);
                int ix = (first - x0) / stride;
                for (int x = first; x < last; x += stride, ++ix)
                    out_row[x] += wv * in_row[ix];
            }
        }
    }
}

// Transposed-conv input gradient row: gather with order (co, ky, kx).
template <typename T>
inline void convt2d_gin_row(const TensorT<T>& gout, const TensorT<T>& w, int stride, int pad,
                            int n, int ci, int iy, int in_w, T* gin_row) {
    const int k = w.h, oc = w.c;
    for (int co = 0; co < oc; ++co) {
        const T* g_plane = &gout.v[((static_cast<size_t>(n) * oc + co) * gout.h) * gout.w];
        const T* w_base = &w.v[((static_cast<size_t>(ci) * oc + co) * k) * k];
        for (int ky = 0; ky < k; ++ky) {
            const int y = iy * stride - pad + ky;
            if (y < 0 || y >= gout.h) continue;
            const T* g_row = g_plane + static_cast<size_t>(y) * gout.w;
            const T* w_row = w_base + static_cast<size_t>(ky) * k;
            for (int kx = 0; kx < k; ++kx) {
                const T wv = w_row[kx];
                int lo = 0;
                while (lo < in_w && lo * stride - pad + kx < 0) ++lo;
                int hi = in_w;
                while (hi > lo && (hi - 1) * stride - pad + kx >= gout.w) --hi;
                const T* src = g_row - pad + kx;
                for (int ix = lo; ix < hi; ++ix) gin_row[ix] += wv * src[ix * stride];
            }
        }
    }
}

// Weight gradient for one conv tap; order (n, oy, ox).
template <typename T>
inline T conv2d_gw_tap(const TensorT<T>& in, const TensorT<T>& gout, int stride, int pad, int co,
                       int ci, int ky, int kx) {
    T acc = T(0);
    for (int n = 0; n < gout.n; ++n) {
        const T* in_plane = &in.v[((static_cast<size_t>(n) * in.c + ci) * in.h) * in.w];
        const T* g_plane = &gout.v[((static_cast<size_t>(n) * gout.c + co) * gout.h) * gout.w];
        for (int oy = 0; oy < gout.h; ++oy) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= in.h) continue;
            const T* in_row = in_plane + static_cast<size_t>(iy) * in.w;
            const T* g_row = g_plane + static_cast<size_t>(oy) * gout.w;
            int lo = 0;
            while (lo < gout.w && lo * stride - pad + kx < 0) ++lo;
            int hi = gout.w;
            while (hi > lo && (hi - 1) * stride - pad + kx >= in.w) --hi;
            const T* src = in_row - pad + kx;
            for (int ox = lo; ox < hi; ++ox) acc += src[ox * stride] * g_row[ox];
        }
    }
    return acc;
}

// Weight gradient for one transposed-conv tap; order (n, iy, ix).
template <typename T>
inline T convt2d_gw_tap(const TensorT<T>& in, const TensorT<T>& gout, int stride, int pad, int ci,
                        int co, int ky, int kx) {
    T acc = T(0);
    for (int n = 0; n < in.n; ++n) {
        const T* in_plane = &in.v[((static_cast<size_t>(n) * in.c + ci) * in.h) * in.w];
        const T* g_plane = &gout.v[((static_cast<size_t>(n) * gout.c + co) * gout.h) * gout.w];
        for (int iy = 0; iy < in.h; ++iy) {
            const int y = iy * stride - pad + ky;
            if (y < 0 || y >= gout.h) continue;
            const T* in_row = in_plane + static_cast<size_t>(iy) * in.w;
            const T* g_row = g_plane + static_cast<size_t>(y) * gout.w;
            int lo = 0;
            while (lo < in.w && lo * stride - pad + kx < 0) ++lo;
            int hi = in.w;
            while (hi > lo && (hi - 1) * stride - pad + kx >= gout.w) --hi;
            const T* dst = g_row - pad + kx;
            for (int ix = lo; ix < hi; ++ix) acc += in_row[ix] * dst[ix * stride];
        }
    }
    return acc;
}

template <typename T>
inline T bias_grad_sum(const TensorT<T>& gout, int co) {
    T acc = T(0);
    for (int n = 0; n < gout.n; ++n) {
        const T* plane = &gout.v[((static_cast<size_t>(n) * gout.c + co) * gout.h) * gout.w];
        const size_t count = static_cast<size_t>(gout.h) * gout.w;
        for (size_t i = 0; i < count; ++i) acc += plane[i];
    }
    return acc;
}

}  // namespace detail

template <typename T>
void conv2d_forward(const TensorT<T>& in, const TensorT<T>& w, const std::vector<T>& bias,
                    int stride, int pad, TensorT<T>& out) {
    const long rows = static_cast<long>(out.n) * w.n * out.h;
#pragma omp parallel for schedule(static) if (rows* out.w >= 4096)
    for (long idx = 0; idx < rows; ++idx) {
        const int oy = static_cast<int>(idx % out.h);
        const int co = static_cast<int>((idx / out.h) % w.n);
        const int n = static_cast<int>(idx / (static_cast<long>(out.h) * w.n));
        detail::conv2d_row(in, w, bias, stride, pad, n, co, oy, out.w,
                           &out.v[((static_cast<size_t>(n) * out.c + co) * out.h + oy) * out.w]);
    }
}

template <typename T>
void conv2d_backward_input(const TensorT<T>& gout, const TensorT<T>& w, int stride, int pad,
                           TensorT<T>& gin) {
    const long rows = static_cast<long>(gin.n) * gin.c * gin.h;
#pragma omp parallel for schedule(static) if (rows* gin.w >= 4096)
    for (long idx = 0; idx < rows; ++idx) {
        const int y = static_cast<int>(idx % gin.h);
        const int ci = static_cast<int>((idx / gin.h) % gin.c);
        const int n = static_cast<int>(idx / (static_cast<long>(gin.h) * gin.c));
        detail::conv2d_gin_row(gout, w, stride, pad, n, ci, y, gin.w,
                               &gin.v[((static_cast<size_t>(n) * gin.c + ci) * gin.h + y) * gin.w]);
    }
}

template <typename T>
void conv2d_backward_params(const TensorT<T>& in, const TensorT<T>& gout, int stride, int pad,
                            TensorT<T>& gw, std::vector<T>& gbias) {
    const int oc = gw.n, ic = gw.c, k = gw.h;
    const long taps = static_cast<long>(oc) * ic * k * k;
#pragma omp parallel for schedule(static) if (taps >= 64)
    for (long idx = 0; idx < taps; ++idx) {
        const int kx = static_cast<int>(idx % k);
        const int ky = static_cast<int>((idx / k) % k);
        const int ci = static_cast<int>((idx / (k * k)) % ic);
        const int co = static_cast<int>(idx / (static_cast<long>(k) * k * ic));
        gw.at(co, ci, ky, kx) += detail::conv2d_gw_tap(in, gout, stride, pad, co, ci, ky, kx);
    }
#pragma omp parallel for schedule(static) if (oc >= 8)
    for (int co = 0; co < oc; ++co) gbias[co] += detail::bias_grad_sum(gout, co);
}

template <typename T>
void convt2d_forward(const TensorT<T>& in, const TensorT<T>& w, const std::vector<T>& bias,
                     int stride, int pad, TensorT<T>& out) {
    const long rows = static_cast<long>(out.n) * w.c * out.h;
#pragma omp parallel for schedule(static) if (rows* out.w >= 4096)
    for (long idx = 0; idx < rows; ++idx) {
        const int y = static_cast<int>(idx % out.h);
        const int co = static_cast<int>((idx / out.h) % w.c);
        const int n = static_cast<int>(idx / (static_cast<long>(out.h) * w.c));
        detail::convt2d_row(in, w, bias, stride, pad, n, co, y, out.w,
                            &out.v[((static_cast<size_t>(n) * out.c + co) * out.h + y) * out.w]);
    }
}

template <typename T>
void convt2d_backward_input(const TensorT<T>& gout, const TensorT<T>& w, int stride, int pad,
                            TensorT<T>& gin) {
    const long rows = static_cast<long>(gin.n) * gin.c * gin.h;
#pragma omp parallel for schedule(static) if (rows* gin.w >= 4096)
    for (long idx = 0; idx < rows; ++idx) {
        const int iy = static_cast<int>(idx % gin.h);
        const int ci = static_cast<int>((idx / gin.h) % gin.c);
        const int n = static_cast<int>(idx / (static_cast<long>(gin.h) * gin.c));
        detail::convt2d_gin_row(gout, w, stride, pad, n, ci, iy, gin.w,
                                &gin.v[((static_cast<size_t>(n) * gin.c + ci) * gin.h + iy) * gin.w]);
    }
}

template <typename T>
void convt2d_backward_params(const TensorT<T>& in, const TensorT<T>& gout, int stride, int pad,
                             TensorT<T>& gw, std::vector<T>& gbias) {
    const int ic = gw.n, oc = gw.c, k = gw.h;
    const long taps = static_cast<long>(ic) * oc * k * k;
#pragma omp parallel for schedule(static) if (taps >= 64)
    for (long idx = 0; idx < taps; ++idx) {
        const int kx = static_cast<int>(idx % k);
        const int ky = static_cast<int>((idx / k) % k);
        const int co = static_cast<int>((idx / (k * k)) % oc);
        const int ci = static_cast<int>(idx / (static_cast<long>(k) * k * oc));
        gw.at(ci, co, ky, kx) += detail::convt2d_gw_tap(in, gout, stride, pad, ci, co, ky, kx);
    }
#pragma omp parallel for schedule(static) if (oc >= 8)
    for (int co = 0; co < oc; ++co) gbias[co] += detail::bias_grad_sum(gout, co);
}

// ---------------------------------------------------------------------------
// Serial reference implementations: the plainest possible loop nests, kept
// for correctness testing and benchmarking against the parallel kernels.
// ---------------------------------------------------------------------------

namespace serial {

void warp_bilinear(const GrayImage& src, const std::vector<double>& map_y,
                   const std::vector<double>& map_x, GrayImage& dst);
void warp_nearest(const GrayImage& src, const std::vector<double>& map_y,
                  const std::vector<double>& map_x, GrayImage& dst);
void raster_sticks(const std::vector<StickPoint>& points, const std::vector<double>& values,
                   double half_width, GrayImage& dst);
bool thin_pass(const std::vector<uint8_t>& in, std::vector<uint8_t>& out, int width, int height,
               int parity);

template <typename T>
void conv2d_forward(const TensorT<T>& in, const TensorT<T>& w, const std::vector<T>& bias,
                    int stride, int pad, TensorT<T>& out) {
    const int k = w.h;
    for (int n = 0; n < out.n; ++n)
        for (int co = 0; co < w.n; ++co)
            for (int oy = 0; oy < out.h; ++oy)
                for (int ox = 0; ox < out.w; ++ox) {
                    T acc = bias.empty() ? T(0) : bias[co];
                    for (int ci = 0; ci < w.c; ++ci)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx) {
                                const int iy = oy * stride - pad + ky;
                                const int ix = ox * stride - pad + kx;
                                if (iy < 0 || iy >= in.h || ix < 0 || ix >= in.w) continue;
                                acc += in.at(n, ci, iy, ix) * w.at(co, ci, ky, kx);
                            }
                    out.at(n, co, oy, ox) = acc;
                }
}

template <typename T>
void conv2d_backward_input(const TensorT<T>& gout, const TensorT<T>& w, int stride, int pad,
                           TensorT<T>& gin) {
    const int k = w.h;
    for (int n = 0; n < gin.n; ++n)
        for (int ci = 0; ci < gin.c; ++ci)
            for (int y = 0; y < gin.h; ++y)
                for (int x = 0; x < gin.w; ++x) {
                    T acc = T(0);
                    for (int co = 0; co < w.n; ++co)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx) {
                                const int ty = y + pad - ky;
                                const int tx = x + pad - kx;
                                if (ty < 0 || tx < 0 || ty % stride || tx % stride) continue;
                                const int oy = ty / stride, ox = tx / stride;
                                if (oy >= gout.h || ox >= gout.w) continue;
                                acc += gout.at(n, co, oy, ox) * w.at(co, ci, ky, kx);
                            }
                    gin.at(n, ci, y, x) += acc;
                }
}

template <typename T>
void conv2d_backward_params(const TensorT<T>& in, const TensorT<T>& gout, int stride, int pad,
                            TensorT<T>& gw, std::vector<T>& gbias) {
    const int k = gw.h;
    for (int co = 0; co < gw.n; ++co)
        for (int ci = 0; ci < gw.c; ++ci)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    T acc = T(0);
                    for (int n = 0; n < gout.n; ++n)
                        for (int oy = 0; oy < gout.h; ++oy)
                            for (int ox = 0; ox < gout.w; ++ox) {
                                const int iy = oy * stride - pad + ky;
                                const int ix = ox * stride - pad + kx;
                                if (iy < 0 || iy >= in.h || ix < 0 || ix >= in.w) continue;
                                acc += in.at(n, ci, iy, ix) * gout.at(n, co, oy, ox);
                            }
                    gw.at(co, ci, ky, kx) += acc;
                }
    for (int co = 0; co < gw.n; ++co) {
        T acc = T(0);
        for (int n = 0; n < gout.n; ++n)
            for (int oy = 0; oy < gout.h; ++oy)
                for (int ox = 0; ox < gout.w; ++ox) acc += gout.at(n, co, oy, ox);
        gbias[co] += acc;
    }
}

template <typename T>
void convt2d_forward(const TensorT<T>& in, const TensorT<T>& w, const std::vector<T>& bias,
                     int stride, int pad, TensorT<T>& out) {
    const int k = w.h;
    for (int n = 0; n < out.n; ++n)
        for (int co = 0; co < w.c; ++co)
            for (int y = 0; y < out.h; ++y)
                for (int x = 0; x < out.w; ++x) {
                    T acc = bias.empty() ? T(0) : bias[co];
                    for (int ci = 0; ci < w.n; ++ci)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx) {
                                const int ty = y + pad - ky;
                                const int tx = x + pad - kx;
                                if (ty < 0 || tx < 0 || ty % stride || tx % stride) continue;
                                const int iy = ty / stride, ix = tx / stride;
                                if (iy >= in.h || ix >= in.w) continue;
                                acc += in.at(n, ci, iy, ix) * w.at(ci, co, ky, kx);
                            }
                    out.at(n, co, y, x) = acc;
                }
}

template <typename T>
void convt2d_backward_input(const TensorT<T>& gout, const TensorT<T>& w, int stride, int pad,
                            TensorT<T>& gin) {
    const int k = w.h;
    for (int n = 0; n < gin.n; ++n)
        for (int ci = 0; ci < gin.c; ++ci)
            for (int iy = 0; iy < gin.h; ++iy)
                for (int ix = 0; ix < gin.w; ++ix) {
                    T acc = T(0);
                    for (int co = 0; co < w.c; ++co)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx) {
                                const int y = iy * stride - pad + ky;
                                const int x = ix * stride - pad + kx;
                                if (y < 0 || y >= gout.h || x < 0 || x >= gout.w) continue;
                                acc += gout.at(n, co, y, x) * w.at(ci, co, ky, kx);
                            }
                    gin.at(n, ci, iy, ix) += acc;
                }
}

template <typename T>
void convt2d_backward_params(const TensorT<T>& in, const TensorT<T>& gout, int stride, int pad,
                             TensorT<T>& gw, std::vector<T>& gbias) {
    const int k = gw.h;
    for (int ci = 0; ci < gw.n; ++ci)
        for (int co = 0; co < gw.c; ++co)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    T acc = T(0);
                    for (int n = 0; n < in.n; ++n)
                        for (int iy = 0; iy < in.h; ++iy)
                            for (int ix = 0; ix < in.w; ++ix) {
                                const int y = iy * stride - pad + ky;
                                const int x = ix * stride - pad + kx;
                                if (y < 0 || y >= gout.h || x < 0 || x >= gout.w) continue;
                                acc += in.at(n, ci, iy, ix) * gout.at(n, co, y, x);
                            }
                    gw.at(ci, co, ky, kx) += acc;
                }
    for (int co = 0; co < gw.c; ++co) {
        T acc = T(0);
        for (int n = 0; n < gout.n; ++n)
            for (int y = 0; y < gout.h; ++y)
                for (int x = 0; x < gout.w; ++x) acc += gout.at(n, co, y, x);
        gbias[co] += acc;
    }
}

}  // namespace serial

}  // namespace straightkit::kernels
