#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "esisr/errors.hpp"

namespace esisr {

enum class ColorSpace { RGB, YCbCr, GrayY };

inline const char* to_string(ColorSpace cs) {
    switch (cs) {
        case ColorSpace::RGB: return "RGB";
        case ColorSpace::YCbCr: return "YCbCr";
        case ColorSpace::GrayY: return "GrayY";
    }
    return "?";
}

/// Planar float raster, samples normalized to [0,1].
/// Layout: data[c * w * h + y * w + x].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    ColorSpace colorspace = ColorSpace::GrayY;
    std::vector<float> data;

    Image() = default;

    Image(int w, int h, int c, ColorSpace cs, float fill = 0.0f)
        : width(w), height(h), channels(c), colorspace(cs),
          data(static_cast<size_t>(w) * h * c, fill) {
        detail::require(w >= 1 && h >= 1, "Image: dimensions must be >= 1");
        detail::require(c == 1 || c == 3, "Image: channels must be 1 or 3");
        detail::require((cs == ColorSpace::GrayY) == (c == 1),
                        "Image: GrayY requires 1 channel, RGB/YCbCr require 3");
    }

    size_t plane_size() const { return static_cast<size_t>(width) * height; }
    size_t size() const { return data.size(); }

    float& at(int c, int y, int x) {
        return data[static_cast<size_t>(c) * plane_size() + static_cast<size_t>(y) * width + x];
    }
    float at(int c, int y, int x) const {
        return data[static_cast<size_t>(c) * plane_size() + static_cast<size_t>(y) * width + x];
    }

    float* plane(int c) { return data.data() + static_cast<size_t>(c) * plane_size(); }
    const float* plane(int c) const { return data.data() + static_cast<size_t>(c) * plane_size(); }

    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }

    /// Clamp every sample to [0,1]; non-finite samples become 0.
    Image& clamp01() {
        for (float& v : data) {
            if (!(v > 0.0f)) v = 0.0f;   // also catches NaN
            else if (v > 1.0f) v = 1.0f;
        }
        return *this;
    }
};

// BT.601 full-range luma/chroma coefficients.
namespace bt601 {
constexpr double kr = 0.299;
constexpr double kg = 0.587;
constexpr double kb = 0.114;
}

/// RGB -> YCbCr, ITU-R BT.601 full range. Chroma carried with +0.5 offset.
inline Image rgb_to_ycbcr(const Image& img) {
    detail::require(img.colorspace == ColorSpace::RGB, "rgb_to_ycbcr: input must be RGB");
    Image out(img.width, img.height, 3, ColorSpace::YCbCr);
    const float* r = img.plane(0);
    const float* g = img.plane(1);
    const float* b = img.plane(2);
    float* y = out.plane(0);
    float* cb = out.plane(1);
    float* cr = out.plane(2);
    const size_t n = img.plane_size();
    for (size_t i = 0; i < n; ++i) {
        const double R = r[i], G = g[i], B = b[i];
        const double Y = bt601::kr * R + bt601::kg * G + bt601::kb * B;
        y[i] = static_cast<float>(Y);
        cb[i] = static_cast<float>(0.5 + 0.5 * (B - Y) / (1.0 - bt601::kb));
        cr[i] = static_cast<float>(0.5 + 0.5 * (R - Y) / (1.0 - bt601::kr));
    }
    return out.clamp01();
}

/// YCbCr -> RGB, inverse of rgb_to_ycbcr (clamped).
inline Image ycbcr_to_rgb(const Image& img) {
    detail::require(img.colorspace == ColorSpace::YCbCr, "ycbcr_to_rgb: input must be YCbCr");
    Image out(img.width, img.height, 3, ColorSpace::RGB);
    const float* y = img.plane(0);
    const float* cb = img.plane(1);
    const float* cr = img.plane(2);
    float* r = out.plane(0);
    float* g = out.plane(1);
    float* b = out.plane(2);
    const size_t n = img.plane_size();
    for (size_t i = 0; i < n; ++i) {
        const double Y = y[i];
        const double Cb = cb[i] - 0.5, Cr = cr[i] - 0.5;
        const double R = Y + 2.0 * (1.0 - bt601::kr) * Cr;
        const double B = Y + 2.0 * (1.0 - bt601::kb) * Cb;
        const double G = (Y - bt601::kr * R - bt601::kb * B) / bt601::kg;
        r[i] = static_cast<float>(R);
        g[i] = static_cast<float>(G);
        b[i] = static_cast<float>(B);
    }
    return out.clamp01();
}

/// Luminance plane of a YCbCr image as a GrayY image.
inline Image extract_y(const Image& img) {
    detail::require(img.colorspace == ColorSpace::YCbCr, "extract_y: input must be YCbCr");
    Image out(img.width, img.height, 1, ColorSpace::GrayY);
    std::copy(img.plane(0), img.plane(0) + img.plane_size(), out.plane(0));
    return out;
}

/// Exact sub-raster copy. Rectangle must lie inside the image.
inline Image crop(const Image& img, int x, int y, int w, int h) {
    detail::require(w >= 1 && h >= 1, "crop: empty rectangle");
    detail::require(x >= 0 && y >= 0 && x + w <= img.width && y + h <= img.height,
                    "crop: rectangle out of bounds");
    Image out(w, h, img.channels, img.colorspace);
    for (int c = 0; c < img.channels; ++c)
        for (int row = 0; row < h; ++row)
            std::copy(&img.at(c, y + row, x), &img.at(c, y + row, x) + w, &out.at(c, row, 0));
    return out;
}

namespace detail {

// Dihedral-group action used by the 8-fold self-ensemble.
// index = rot + 4*flip: rotate by 90*rot degrees CCW, after an optional
// horizontal flip.
inline Image dihedral(const Image& img, int rot, bool flip) {
    const int w = img.width, h = img.height;
    const bool swap_axes = (rot % 2) != 0;
    Image out(swap_axes ? h : w, swap_axes ? w : h, img.channels, img.colorspace);
    for (int c = 0; c < img.channels; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                int sx = flip ? (w - 1 - x) : x;
                int ox = 0, oy = 0;
                switch (rot & 3) {
                    case 0: ox = sx;         oy = y;          break;
                    case 1: ox = y;          oy = w - 1 - sx; break;
                    case 2: ox = w - 1 - sx; oy = h - 1 - y;  break;
                    case 3: ox = h - 1 - y;  oy = sx;         break;
                }
                out.at(c, oy, ox) = img.at(c, y, x);
            }
        }
    }
    return out;
}

} // namespace detail

/// The 8 dihedral transforms of a GrayY image; index 0 is the identity.
inline std::vector<Image> self_ensemble(const Image& img) {
    detail::require(img.colorspace == ColorSpace::GrayY, "self_ensemble: input must be GrayY");
    std::vector<Image> out;
    out.reserve(8);
    for (int i = 0; i < 8; ++i) out.push_back(detail::dihedral(img, i & 3, (i & 4) != 0));
    return out;
}

/// Exact inverse of the index-th self-ensemble transform.
inline Image self_ensemble_inverse(const Image& img, int index) {
    detail::require(index >= 0 && index < 8, "self_ensemble_inverse: index must be in [0,8)");
    detail::require(img.colorspace == ColorSpace::GrayY, "self_ensemble_inverse: input must be GrayY");
    const int rot = index & 3;
    const bool flip = (index & 4) != 0;
    // inverse of (flip then rot k) is (rot 4-k then flip)
    Image t = detail::dihedral(img, (4 - rot) & 3, false);
    return flip ? detail::dihedral(t, 0, true) : t;
}

} // namespace esisr
