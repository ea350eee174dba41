#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "esisr/errors.hpp"
#include "esisr/tensor.hpp"

namespace esisr::nn {

/// Convolution parameters. Weights are (out_ch, in_ch, k, k); bias has
/// out_ch entries. Padding is zeros on every border.
template <typename T = float>
struct ConvParams {
    Tensor4<T> weights;
    std::vector<T> bias;
    int stride = 1;
    int pad = 0;

    int out_ch() const { return weights.n; }
    int in_ch() const { return weights.c; }
    int k() const { return weights.h; }

    size_t param_count() const { return weights.size() + bias.size(); }
};

/// He-style initialization: weights ~ N(0, sqrt(2 / (in_ch k^2))), zero bias.
template <typename T>
ConvParams<T> make_conv(int out_ch, int in_ch, int k, int stride, int pad,
                        detail::NormalSampler& rng) {
    detail::require(out_ch >= 1 && in_ch >= 1 && k >= 1, "make_conv: bad geometry");
    ConvParams<T> p;
    p.weights = Tensor4<T>(out_ch, in_ch, k, k);
    p.bias.assign(static_cast<size_t>(out_ch), T(0));
    p.stride = stride;
    p.pad = pad;
    const double stddev = std::sqrt(2.0 / (static_cast<double>(in_ch) * k * k));
    for (T& w : p.weights.v) w = static_cast<T>(rng.next() * stddev);
    return p;
}

namespace detail2 {

// Output indices o with 0 <= o*stride + off < lim.
inline void out_range(int out, int stride, int off, int lim, int& lo, int& hi) {
    lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
    hi = off < lim ? std::min(out, (lim - 1 - off) / stride + 1) : 0;
    if (hi < lo) hi = lo;
}

} // namespace detail2

/// Cross-correlation with zero padding.
/// Output spatial size = (in + 2 pad - k) / stride + 1 (must divide evenly).
template <typename T>
Tensor4<T> conv2d_fwd(const Tensor4<T>& x, const ConvParams<T>& p) {
    detail::require(x.c == p.in_ch(), "conv2d: input channels " + std::to_string(x.c) +
                                          " != expected " + std::to_string(p.in_ch()));
    const int k = p.k(), s = p.stride, pd = p.pad;
    detail::require((x.h + 2 * pd - k) % s == 0 && (x.w + 2 * pd - k) % s == 0,
                    "conv2d: non-integer output size");
    const int oh = (x.h + 2 * pd - k) / s + 1;
    const int ow = (x.w + 2 * pd - k) / s + 1;
    detail::require(oh >= 1 && ow >= 1, "conv2d: kernel larger than padded input");

    Tensor4<T> out(x.n, p.out_ch(), oh, ow);
    for (int ni = 0; ni < x.n; ++ni) {
        for (int co = 0; co < p.out_ch(); ++co) {
            T* oc = out.chan(ni, co);
            const T b = p.bias[static_cast<size_t>(co)];
            for (size_t i = 0; i < out.plane(); ++i) oc[i] = b;
            for (int ci = 0; ci < x.c; ++ci) {
                const T* ic = x.chan(ni, ci);
                for (int ky = 0; ky < k; ++ky) {
                    int oy_lo, oy_hi;
                    detail2::out_range(oh, s, ky - pd, x.h, oy_lo, oy_hi);
                    for (int kx = 0; kx < k; ++kx) {
                        const T wv = p.weights.at(co, ci, ky, kx);
                        if (wv == T(0)) continue;
                        int ox_lo, ox_hi;
                        detail2::out_range(ow, s, kx - pd, x.w, ox_lo, ox_hi);
                        for (int oy = oy_lo; oy < oy_hi; ++oy) {
                            const T* irow = ic + static_cast<size_t>(oy * s + ky - pd) * x.w + (kx - pd);
                            T* orow = oc + static_cast<size_t>(oy) * ow;
                            if (s == 1) {
                                for (int ox = ox_lo; ox < ox_hi; ++ox) orow[ox] += wv * irow[ox];
                            } else {
                                for (int ox = ox_lo; ox < ox_hi; ++ox) orow[ox] += wv * irow[static_cast<size_t>(ox) * s];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

template <typename T>
struct ConvGrads {
    Tensor4<T> x;   // gradient w.r.t. the input
    Tensor4<T> w;   // gradient w.r.t. the weights
    std::vector<T> b;
};

/// Exact gradients of conv2d_fwd. grad_b is the per-channel sum of
/// grad_out; grad_x and grad_w are the adjoint correlations.
template <typename T>
ConvGrads<T> conv2d_bwd(const Tensor4<T>& x, const ConvParams<T>& p, const Tensor4<T>& grad_out) {
    const int k = p.k(), s = p.stride, pd = p.pad;
    const int oh = (x.h + 2 * pd - k) / s + 1;
    const int ow = (x.w + 2 * pd - k) / s + 1;
    detail::require(grad_out.n == x.n && grad_out.c == p.out_ch() &&
                        grad_out.h == oh && grad_out.w == ow,
                    "conv2d_bwd: grad_out shape mismatch");

    ConvGrads<T> g;
    g.x = Tensor4<T>(x.n, x.c, x.h, x.w);
    g.w = Tensor4<T>(p.out_ch(), p.in_ch(), k, k);
    g.b.assign(static_cast<size_t>(p.out_ch()), T(0));

    for (int ni = 0; ni < x.n; ++ni) {
        for (int co = 0; co < p.out_ch(); ++co) {
            const T* gc = grad_out.chan(ni, co);
            T bacc = T(0);
            for (size_t i = 0; i < grad_out.plane(); ++i) bacc += gc[i];
            g.b[static_cast<size_t>(co)] += bacc;
            for (int ci = 0; ci < x.c; ++ci) {
                const T* ic = x.chan(ni, ci);
                T* gxc = g.x.chan(ni, ci);
                for (int ky = 0; ky < k; ++ky) {
                    int oy_lo, oy_hi;
                    detail2::out_range(oh, s, ky - pd, x.h, oy_lo, oy_hi);
                    for (int kx = 0; kx < k; ++kx) {
                        int ox_lo, ox_hi;
                        detail2::out_range(ow, s, kx - pd, x.w, ox_lo, ox_hi);
                        const T wv = p.weights.at(co, ci, ky, kx);
                        T wacc = T(0);
                        for (int oy = oy_lo; oy < oy_hi; ++oy) {
                            const T* irow = ic + static_cast<size_t>(oy * s + ky - pd) * x.w + (kx - pd);
                            T* gxrow = gxc + static_cast<size_t>(oy * s + ky - pd) * x.w + (kx - pd);
                            const T* grow = gc + static_cast<size_t>(oy) * ow;
                            if (s == 1) {
                                for (int ox = ox_lo; ox < ox_hi; ++ox) {
                                    wacc += irow[ox] * grow[ox];
                                    gxrow[ox] += wv * grow[ox];
                                }
                            } else {
                                for (int ox = ox_lo; ox < ox_hi; ++ox) {
                                    wacc += irow[static_cast<size_t>(ox) * s] * grow[ox];
                                    gxrow[static_cast<size_t>(ox) * s] += wv * grow[ox];
                                }
                            }
                        }
                        g.w.at(co, ci, ky, kx) += wacc;
                    }
                }
            }
        }
    }
    return g;
}

/// Fractionally-strided (transposed) convolution, the adjoint of
/// conv2d_fwd with the same ConvParams: input has out_ch channels,
/// output has in_ch channels and spatial size in*stride when
/// k == stride + 2 pad. Bias-free; <conv(x), y> == <x, conv_transpose(y)>.
template <typename T>
Tensor4<T> conv2d_transpose_fwd(const Tensor4<T>& y, const ConvParams<T>& p) {
    detail::require(y.c == p.out_ch(), "conv2d_transpose: input channels " + std::to_string(y.c) +
                                           " != expected " + std::to_string(p.out_ch()));
    const int k = p.k(), s = p.stride, pd = p.pad;
    const int xh = (y.h - 1) * s + k - 2 * pd;
    const int xw = (y.w - 1) * s + k - 2 * pd;
    detail::require(xh >= 1 && xw >= 1, "conv2d_transpose: degenerate output");

    Tensor4<T> out(y.n, p.in_ch(), xh, xw);
    for (int ni = 0; ni < y.n; ++ni) {
        for (int co = 0; co < p.out_ch(); ++co) {
            const T* yc = y.chan(ni, co);
            for (int ci = 0; ci < p.in_ch(); ++ci) {
                T* oc = out.chan(ni, ci);
                for (int ky = 0; ky < k; ++ky) {
                    int oy_lo, oy_hi;
                    detail2::out_range(y.h, s, ky - pd, xh, oy_lo, oy_hi);
                    for (int kx = 0; kx < k; ++kx) {
                        const T wv = p.weights.at(co, ci, ky, kx);
                        if (wv == T(0)) continue;
                        int ox_lo, ox_hi;
                        detail2::out_range(y.w, s, kx - pd, xw, ox_lo, ox_hi);
                        for (int oy = oy_lo; oy < oy_hi; ++oy) {
                            T* orow = oc + static_cast<size_t>(oy * s + ky - pd) * xw + (kx - pd);
                            const T* yrow = yc + static_cast<size_t>(oy) * y.w;
                            if (s == 1) {
                                for (int ox = ox_lo; ox < ox_hi; ++ox) orow[ox] += wv * yrow[ox];
                            } else {
                                for (int ox = ox_lo; ox < ox_hi; ++ox) orow[static_cast<size_t>(ox) * s] += wv * yrow[ox];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

/// Gradients of conv2d_transpose_fwd: grad to the input is a plain
/// bias-free conv2d of grad_out; grad to the weights reuses the conv
/// weight-gradient with the roles of input and grad_out swapped.
template <typename T>
ConvGrads<T> conv2d_transpose_bwd(const Tensor4<T>& y, const ConvParams<T>& p, const Tensor4<T>& grad_out) {
    const int k = p.k(), s = p.stride, pd = p.pad;
    detail::require(grad_out.n == y.n && grad_out.c == p.in_ch() &&
                        grad_out.h == (y.h - 1) * s + k - 2 * pd &&
                        grad_out.w == (y.w - 1) * s + k - 2 * pd,
                    "conv2d_transpose_bwd: grad_out shape mismatch");
    ConvParams<T> nobias = p;
    std::fill(nobias.bias.begin(), nobias.bias.end(), T(0));
    ConvGrads<T> inner = conv2d_bwd(grad_out, nobias, y);   // treats grad_out as conv input
    ConvGrads<T> g;
    g.x = conv2d_fwd(grad_out, nobias);
    g.w = std::move(inner.w);
    g.b.assign(p.bias.size(), T(0));   // op is bias-free
    return g;
}

/// (b, c r^2, h, w) -> (b, c, h r, w r) with the sub-pixel arrangement
/// out[n][c][y][x] = in[n][c r^2 + (y%r) r + (x%r)][y/r][x/r].
template <typename T>
Tensor4<T> pixel_shuffle_fwd(const Tensor4<T>& x, int r) {
    detail::require(r >= 1, "pixel_shuffle: r must be >= 1");
    detail::require(x.c % (r * r) == 0, "pixel_shuffle: channels not divisible by r^2");
    Tensor4<T> out(x.n, x.c / (r * r), x.h * r, x.w * r);
    for (int ni = 0; ni < x.n; ++ni)
        for (int co = 0; co < out.c; ++co)
            for (int oy = 0; oy < out.h; ++oy) {
                T* orow = out.chan(ni, co) + static_cast<size_t>(oy) * out.w;
                for (int ox = 0; ox < out.w; ++ox) {
                    const int ci = co * r * r + (oy % r) * r + (ox % r);
                    orow[ox] = x.at(ni, ci, oy / r, ox / r);
                }
            }
    return out;
}

/// Exact inverse of pixel_shuffle_fwd (also its backward, since the op is
/// a permutation).
template <typename T>
Tensor4<T> pixel_unshuffle(const Tensor4<T>& x, int r) {
    detail::require(r >= 1, "pixel_unshuffle: r must be >= 1");
    detail::require(x.h % r == 0 && x.w % r == 0, "pixel_unshuffle: spatial dims not divisible by r");
    Tensor4<T> out(x.n, x.c * r * r, x.h / r, x.w / r);
    for (int ni = 0; ni < x.n; ++ni)
        for (int ci = 0; ci < x.c; ++ci)
            for (int y = 0; y < x.h; ++y)
                for (int x2 = 0; x2 < x.w; ++x2)
                    out.at(ni, ci * r * r + (y % r) * r + (x2 % r), y / r, x2 / r) = x.at(ni, ci, y, x2);
    return out;
}

template <typename T>
Tensor4<T> relu_fwd(const Tensor4<T>& x) {
    Tensor4<T> out = x;
    for (T& v : out.v) v = v > T(0) ? v : T(0);
    return out;
}

/// Masks grad_out where the forward input was <= 0 (subgradient 0 at 0).
template <typename T>
Tensor4<T> relu_bwd(const Tensor4<T>& x, const Tensor4<T>& grad_out) {
    detail::require(x.same_shape(grad_out), "relu_bwd: shape mismatch");
    Tensor4<T> gx(x.n, x.c, x.h, x.w);
    for (size_t i = 0; i < x.size(); ++i) gx.v[i] = x.v[i] > T(0) ? grad_out.v[i] : T(0);
    return gx;
}

template <typename T>
struct DropoutResult {
    Tensor4<T> y;
    std::vector<uint8_t> mask;   // 1 = kept; empty in inference mode
    T scale = T(1);
};

/// Inverted dropout: in training, zero each sample with probability
/// `rate` and scale survivors by 1/(1-rate); in inference, identity.
template <typename T>
DropoutResult<T> dropout_fwd(const Tensor4<T>& x, double rate, uint64_t rng_seed, bool training) {
    detail::require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0,1)");
    DropoutResult<T> r;
    if (!training || rate == 0.0) {
        r.y = x;
        return r;
    }
    r.y = Tensor4<T>(x.n, x.c, x.h, x.w);
    r.mask.resize(x.size());
    r.scale = static_cast<T>(1.0 / (1.0 - rate));
    detail::NormalSampler rng(rng_seed);
    for (size_t i = 0; i < x.size(); ++i) {
        const bool keep = rng.uniform01() >= rate;
        r.mask[i] = keep ? 1 : 0;
        r.y.v[i] = keep ? x.v[i] * r.scale : T(0);
    }
    return r;
}

template <typename T>
Tensor4<T> dropout_bwd(const DropoutResult<T>& fwd, const Tensor4<T>& grad_out) {
    if (fwd.mask.empty()) return grad_out;   // was identity
    detail::require(fwd.mask.size() == grad_out.size(), "dropout_bwd: shape mismatch");
    Tensor4<T> gx = grad_out;
    for (size_t i = 0; i < gx.size(); ++i) gx.v[i] = fwd.mask[i] ? gx.v[i] * fwd.scale : T(0);
    return gx;
}

/// Channel-dimension concatenation; inputs must agree on batch and
/// spatial dims.
template <typename T>
Tensor4<T> concat_channels(const std::vector<const Tensor4<T>*>& xs) {
    detail::require(!xs.empty(), "concat_channels: no inputs");
    int total_c = 0;
    for (const Tensor4<T>* x : xs) {
        detail::require(x->n == xs[0]->n && x->h == xs[0]->h && x->w == xs[0]->w,
                        "concat_channels: batch/spatial mismatch");
        total_c += x->c;
    }
    Tensor4<T> out(xs[0]->n, total_c, xs[0]->h, xs[0]->w);
    for (int ni = 0; ni < out.n; ++ni) {
        int co = 0;
        for (const Tensor4<T>* x : xs)
            for (int ci = 0; ci < x->c; ++ci, ++co)
                std::copy(x->chan(ni, ci), x->chan(ni, ci) + x->plane(), out.chan(ni, co));
    }
    return out;
}

/// Backward of concat_channels: routes grad slices back per input.
template <typename T>
std::vector<Tensor4<T>> split_channels(const Tensor4<T>& grad_out, const std::vector<int>& channel_counts) {
    int total = 0;
    for (int c : channel_counts) total += c;
    detail::require(total == grad_out.c, "split_channels: channel counts do not sum to input");
    std::vector<Tensor4<T>> parts;
    parts.reserve(channel_counts.size());
    int base = 0;
    for (int cc : channel_counts) {
        Tensor4<T> part(grad_out.n, cc, grad_out.h, grad_out.w);
        for (int ni = 0; ni < grad_out.n; ++ni)
            for (int ci = 0; ci < cc; ++ci)
                std::copy(grad_out.chan(ni, base + ci), grad_out.chan(ni, base + ci) + grad_out.plane(),
                          part.chan(ni, ci));
        parts.push_back(std::move(part));
        base += cc;
    }
    return parts;
}

/// Elementwise sum (residual connection). Backward passes grad_out to
/// both operands unchanged.
template <typename T>
Tensor4<T> add(const Tensor4<T>& a, const Tensor4<T>& b) {
    detail::require(a.same_shape(b), "add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    Tensor4<T> out = a;
    for (size_t i = 0; i < out.size(); ++i) out.v[i] += b.v[i];
    return out;
}

} // namespace esisr::nn
