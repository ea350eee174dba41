#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "esisr/errors.hpp"
#include "esisr/image.hpp"

namespace esisr {

/// SSIM stabilizer constants and window geometry. C1 = (0.01 L)^2,
/// C2 = (0.03 L)^2.
struct SsimParams {
    int window = 11;       // odd, >= 3
    double sigma = 1.5;
    double L = 1.0;        // dynamic range of the samples
    double C1 = 1e-4;
    double C2 = 9e-4;

    static SsimParams for_range(double L, int window = 11, double sigma = 1.5) {
        detail::require(window >= 3 && window % 2 == 1, "SsimParams: window must be odd and >= 3");
        detail::require(L > 0.0, "SsimParams: dynamic range must be positive");
        SsimParams p;
        p.window = window;
        p.sigma = sigma;
        p.L = L;
        p.C1 = (0.01 * L) * (0.01 * L);
        p.C2 = (0.03 * L) * (0.03 * L);
        return p;
    }
};

/// Laplacian-of-Gaussian kernel, DC-corrected so the weights sum to 0.
/// raw(i,j) = weights[i*size+j] + dc_offset gives the uncorrected sample.
struct LogKernel {
    double sigma = 1.4;
    int size = 9;
    std::vector<double> weights;
    double dc_offset = 0.0;

    double at(int i, int j) const { return weights[static_cast<size_t>(i) * size + j]; }
};

/// Sample LoG(x,y) = -1/(pi s^4) [1 - (x^2+y^2)/(2 s^2)] exp(-(x^2+y^2)/(2 s^2))
/// at integer offsets, then subtract the mean so a constant input gives a
/// zero response.
inline LogKernel log_kernel(double sigma, int size) {
    detail::require(sigma > 0.0, "log_kernel: sigma must be positive");
    detail::require(size >= 3 && size % 2 == 1, "log_kernel: size must be odd and >= 3");
    LogKernel k;
    k.sigma = sigma;
    k.size = size;
    k.weights.resize(static_cast<size_t>(size) * size);
    const int half = size / 2;
    const double s2 = sigma * sigma;
    const double norm = -1.0 / (M_PI * s2 * s2);
    double sum = 0.0;
    for (int y = -half; y <= half; ++y) {
        for (int x = -half; x <= half; ++x) {
            const double r2 = static_cast<double>(x) * x + static_cast<double>(y) * y;
            const double q = r2 / (2.0 * s2);
            const double v = norm * (1.0 - q) * std::exp(-q);
            k.weights[static_cast<size_t>(y + half) * size + (x + half)] = v;
            sum += v;
        }
    }
    k.dc_offset = sum / (static_cast<double>(size) * size);
    for (double& w : k.weights) w -= k.dc_offset;
    return k;
}

/// Default kernel from the pipeline: sigma 1.4, 9x9 support.
inline const LogKernel& default_log_kernel() {
    static const LogKernel k = log_kernel(1.4, 9);
    return k;
}

/// Mean of squared sample differences over all channels.
inline double mse(const Image& a, const Image& b) {
    detail::require(a.same_shape(b), "mse: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

constexpr double kPsnrCap = 100.0;   // dB reported when MSE is exactly 0

/// 10 log10(max^2 / MSE), capped at 100 dB for identical inputs.
inline double psnr(const Image& a, const Image& b, double max_val = 1.0) {
    detail::require(max_val > 0.0, "psnr: max_val must be positive");
    const double m = mse(a, b);
    if (m <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(max_val * max_val / m));
}

namespace detail {

inline std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> w(static_cast<size_t>(size) * size);
    const int half = size / 2;
    double sum = 0.0;
    for (int y = -half; y <= half; ++y)
        for (int x = -half; x <= half; ++x) {
            const double v = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
            w[static_cast<size_t>(y + half) * size + (x + half)] = v;
            sum += v;
        }
    for (double& v : w) v /= sum;
    return w;
}

// Shared SSIM map walk used by the metric and by the loss gradient.
// Visits every valid window position with the local statistics.
template <typename T, typename Fn>
void ssim_map_walk(const T* a, const T* b, int w, int h, const SsimParams& p,
                   const std::vector<double>& win, Fn&& fn) {
    const int k = p.window;
    for (int oy = 0; oy + k <= h; ++oy) {
        for (int ox = 0; ox + k <= w; ++ox) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int j = 0; j < k; ++j)
                for (int i = 0; i < k; ++i) {
                    const double g = win[static_cast<size_t>(j) * k + i];
                    const double xa = a[static_cast<size_t>(oy + j) * w + (ox + i)];
                    const double xb = b[static_cast<size_t>(oy + j) * w + (ox + i)];
                    mx += g * xa;
                    my += g * xb;
                    sxx += g * xa * xa;
                    syy += g * xb * xb;
                    sxy += g * xa * xb;
                }
            sxx -= mx * mx;
            syy -= my * my;
            sxy -= mx * my;
            fn(oy, ox, mx, my, sxx, syy, sxy);
        }
    }
}

template <typename T>
double ssim_planes(const T* a, const T* b, int w, int h, const SsimParams& p) {
    require(p.window <= w && p.window <= h, "ssim: window larger than image");
    const auto win = gaussian_window(p.window, p.sigma);
    double acc = 0.0;
    size_t count = 0;
    ssim_map_walk(a, b, w, h, p,
                  win, [&](int, int, double mx, double my, double sxx, double syy, double sxy) {
                      const double num = (2.0 * mx * my + p.C1) * (2.0 * sxy + p.C2);
                      const double den = (mx * mx + my * my + p.C1) * (sxx + syy + p.C2);
                      acc += num / den;
                      ++count;
                  });
    return acc / static_cast<double>(count);
}

} // namespace detail

/// Mean structural similarity over the valid window positions (no
/// padding); Gaussian-weighted local statistics. Single-channel inputs.
inline double ssim(const Image& a, const Image& b, const SsimParams& p = SsimParams::for_range(1.0)) {
    detail::require(a.same_shape(b), "ssim: shape mismatch");
    detail::require(a.channels == 1, "ssim: single-channel inputs expected");
    return detail::ssim_planes(a.plane(0), b.plane(0), a.width, a.height, p);
}

namespace detail {

// Valid-region cross-correlation of a [0,255]-scaled plane with the LoG
// kernel; returns the mean of squared responses.
template <typename T>
double log_response_power(const T* img, int w, int h, const LogKernel& k) {
    require(w >= k.size && h >= k.size, "sharpness: image smaller than kernel");
    const int ow = w - k.size + 1;
    const int oh = h - k.size + 1;
    double acc = 0.0;
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            double r = 0.0;
            for (int j = 0; j < k.size; ++j)
                for (int i = 0; i < k.size; ++i)
                    r += k.at(j, i) * (255.0 * img[static_cast<size_t>(oy + j) * w + (ox + i)]);
            acc += r * r;
        }
    }
    return acc / (static_cast<double>(ow) * oh);
}

} // namespace detail

/// RMS power of the LoG-filtered image (valid region, samples scaled to
/// [0,255]). Zero for constant images.
inline double sharpness(const Image& img, const LogKernel& k = default_log_kernel()) {
    detail::require(img.channels == 1, "sharpness: GrayY input expected");
    return std::sqrt(detail::log_response_power(img.plane(0), img.width, img.height, k));
}

/// |sharpness(sr) - sharpness(hr)|.
inline double sharpness_delta(const Image& sr, const Image& hr, const LogKernel& k = default_log_kernel()) {
    detail::require(sr.same_shape(hr), "sharpness_delta: shape mismatch");
    return std::fabs(sharpness(sr, k) - sharpness(hr, k));
}

} // namespace esisr
