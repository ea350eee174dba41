#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "esisr/errors.hpp"
#include "esisr/image.hpp"

namespace esisr {

enum class ResizeMethod { Nearest, InterLinear, InterCubic, InterArea };

inline const char* to_string(ResizeMethod m) {
    switch (m) {
        case ResizeMethod::Nearest: return "nearest";
        case ResizeMethod::InterLinear: return "inter-linear";
        case ResizeMethod::InterCubic: return "inter-cubic";
        case ResizeMethod::InterArea: return "inter-area";
    }
    return "?";
}

inline ResizeMethod resize_method_from_string(const std::string& s) {
    if (s == "nearest") return ResizeMethod::Nearest;
    if (s == "linear" || s == "inter-linear") return ResizeMethod::InterLinear;
    if (s == "cubic" || s == "inter-cubic") return ResizeMethod::InterCubic;
    if (s == "area" || s == "inter-area") return ResizeMethod::InterArea;
    throw ContractError("unknown resize method '" + s + "'");
}

namespace detail {

// Catmull-Rom style cubic convolution kernel, a = -0.5.
inline double cubic_weight(double t) {
    constexpr double a = -0.5;
    t = std::fabs(t);
    if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
    return 0.0;
}

inline int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

// Per-axis sampling plan: for each output index, source taps and weights.
struct AxisTap {
    int first = 0;           // first source index (clamped later)
    double w[4] = {0, 0, 0, 0};
    int count = 0;
};

inline std::vector<AxisTap> plan_axis(int src, int dst, ResizeMethod m) {
    std::vector<AxisTap> taps(static_cast<size_t>(dst));
    const double ratio = static_cast<double>(src) / dst;
    for (int o = 0; o < dst; ++o) {
        AxisTap& t = taps[static_cast<size_t>(o)];
        switch (m) {
            case ResizeMethod::Nearest: {
                t.first = clamp_index(static_cast<int>(std::floor(o * ratio)), src);
                t.w[0] = 1.0;
                t.count = 1;
                break;
            }
            case ResizeMethod::InterLinear: {
                const double sc = (o + 0.5) * ratio - 0.5;
                const int i0 = static_cast<int>(std::floor(sc));
                const double f = sc - i0;
                t.first = i0;
                t.w[0] = 1.0 - f;
                t.w[1] = f;
                t.count = 2;
                break;
            }
            case ResizeMethod::InterCubic: {
                const double sc = (o + 0.5) * ratio - 0.5;
                const int i0 = static_cast<int>(std::floor(sc));
                const double f = sc - i0;
                t.first = i0 - 1;
                double sum = 0.0;
                for (int k = 0; k < 4; ++k) {
                    t.w[k] = cubic_weight(f - (k - 1));
                    sum += t.w[k];
                }
                for (int k = 0; k < 4; ++k) t.w[k] /= sum;   // exact partition of unity
                t.count = 4;
                break;
            }
            case ResizeMethod::InterArea:
                break;   // handled by resize_area
        }
    }
    return taps;
}

inline Image resize_separable(const Image& img, int out_w, int out_h, ResizeMethod m) {
    const auto tx = plan_axis(img.width, out_w, m);
    const auto ty = plan_axis(img.height, out_h, m);
    Image out(out_w, out_h, img.channels, img.colorspace);
    for (int c = 0; c < img.channels; ++c) {
        // horizontal pass into a temp raster of size out_w x img.height
        std::vector<double> tmp(static_cast<size_t>(out_w) * img.height);
        for (int y = 0; y < img.height; ++y) {
            const float* src = &img.at(c, y, 0);
            for (int x = 0; x < out_w; ++x) {
                const AxisTap& t = tx[static_cast<size_t>(x)];
                double acc = 0.0;
                for (int k = 0; k < t.count; ++k)
                    acc += t.w[k] * src[clamp_index(t.first + k, img.width)];
                tmp[static_cast<size_t>(y) * out_w + x] = acc;
            }
        }
        for (int y = 0; y < out_h; ++y) {
            const AxisTap& t = ty[static_cast<size_t>(y)];
            for (int x = 0; x < out_w; ++x) {
                double acc = 0.0;
                for (int k = 0; k < t.count; ++k)
                    acc += t.w[k] * tmp[static_cast<size_t>(clamp_index(t.first + k, img.height)) * out_w + x];
                out.at(c, y, x) = static_cast<float>(acc);
            }
        }
    }
    return out.clamp01();
}

// Exact fractional-footprint average: output pixel (x,y) covers the source
// box [x*sx,(x+1)*sx) x [y*sy,(y+1)*sy).
inline Image resize_area(const Image& img, int out_w, int out_h) {
    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;
    Image out(out_w, out_h, img.channels, img.colorspace);
    for (int c = 0; c < img.channels; ++c) {
        for (int y = 0; y < out_h; ++y) {
            const double y0 = y * sy, y1 = (y + 1) * sy;
            const int iy0 = static_cast<int>(std::floor(y0));
            const int iy1 = std::min(static_cast<int>(std::ceil(y1)), img.height);
            for (int x = 0; x < out_w; ++x) {
                const double x0 = x * sx, x1 = (x + 1) * sx;
                const int ix0 = static_cast<int>(std::floor(x0));
                const int ix1 = std::min(static_cast<int>(std::ceil(x1)), img.width);
                double acc = 0.0, wsum = 0.0;
                for (int iy = iy0; iy < iy1; ++iy) {
                    const double hy = std::min(y1, iy + 1.0) - std::max(y0, static_cast<double>(iy));
                    for (int ix = ix0; ix < ix1; ++ix) {
                        const double hx = std::min(x1, ix + 1.0) - std::max(x0, static_cast<double>(ix));
                        const double w = hx * hy;
                        acc += w * img.at(c, iy, ix);
                        wsum += w;
                    }
                }
                out.at(c, y, x) = static_cast<float>(acc / wsum);
            }
        }
    }
    return out.clamp01();
}

} // namespace detail

/// Resample to (out_w, out_h). All methods reproduce constant images
/// exactly; borders use edge clamp. InterArea uses exact source
/// footprint averages when shrinking and falls back to InterLinear when
/// enlarging on both axes.
inline Image resize(const Image& img, int out_w, int out_h, ResizeMethod method) {
    detail::require(out_w >= 1 && out_h >= 1, "resize: output dimensions must be >= 1");
    if (out_w == img.width && out_h == img.height && method != ResizeMethod::Nearest) {
        // fast path, also keeps identity resizes bit-exact
        if (method == ResizeMethod::InterArea || method == ResizeMethod::InterLinear) return img;
    }
    if (method == ResizeMethod::InterArea) {
        if (out_w >= img.width && out_h >= img.height)
            return detail::resize_separable(img, out_w, out_h, ResizeMethod::InterLinear);
        return detail::resize_area(img, out_w, out_h);
    }
    return detail::resize_separable(img, out_w, out_h, method);
}

/// The known downgrade used to form every training pair: InterCubic
/// downscale by exactly 1/scale. Dimensions must be divisible by scale.
inline Image degrade(const Image& hr, int scale) {
    detail::require(scale == 2 || scale == 3 || scale == 4, "degrade: scale must be 2, 3 or 4");
    detail::require(hr.width % scale == 0 && hr.height % scale == 0,
                    "degrade: image dimensions must be divisible by scale");
    return resize(hr, hr.width / scale, hr.height / scale, ResizeMethod::InterCubic);
}

/// Aligned (LR, HR) training patch pairs cut from one source image.
struct PatchSet {
    int patch_size = 0;   // HR patch edge, pixels
    int stride = 0;
    int scale = 1;
    std::string source_id;
    std::vector<std::pair<Image, Image>> patches;   // (lr, hr)

    size_t size() const { return patches.size(); }
    bool empty() const { return patches.empty(); }

    void append(const PatchSet& other) {
        detail::require(patch_size == other.patch_size && scale == other.scale,
                        "PatchSet::append: incompatible patch geometry");
        patches.insert(patches.end(), other.patches.begin(), other.patches.end());
    }
};

/// Raster-order tiling of a GrayY image into (LR, HR) pairs; the LR side
/// of each pair comes from degrade() on the HR patch. A patch larger than
/// the image yields an empty set.
inline PatchSet extract_patches(const Image& hr, int patch_size, int stride, int scale) {
    detail::require(hr.colorspace == ColorSpace::GrayY, "extract_patches: input must be GrayY");
    detail::require(patch_size >= 1 && stride >= 1, "extract_patches: patch_size and stride must be >= 1");
    detail::require(patch_size % scale == 0, "extract_patches: patch_size must be divisible by scale");
    PatchSet set;
    set.patch_size = patch_size;
    set.stride = stride;
    set.scale = scale;
    if (patch_size > hr.width || patch_size > hr.height) return set;
    for (int y = 0; y + patch_size <= hr.height; y += stride) {
        for (int x = 0; x + patch_size <= hr.width; x += stride) {
            Image hp = crop(hr, x, y, patch_size, patch_size);
            Image lp = degrade(hp, scale);
            set.patches.emplace_back(std::move(lp), std::move(hp));
        }
    }
    return set;
}

} // namespace esisr
