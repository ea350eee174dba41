#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "esisr/errors.hpp"

namespace esisr {

/// Dense NCHW tensor with an optional same-shape gradient buffer.
template <typename T = float>
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> v;
    std::vector<T> grad;   // empty until alloc_grad()

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_, T fill = T(0))
        : n(n_), c(c_), h(h_), w(w_),
          v(static_cast<size_t>(n_) * c_ * h_ * w_, fill) {
        detail::require(n_ >= 1 && c_ >= 1 && h_ >= 1 && w_ >= 1, "Tensor4: all dims must be >= 1");
    }

    size_t size() const { return v.size(); }
    size_t plane() const { return static_cast<size_t>(h) * w; }

    T& at(int ni, int ci, int y, int x) {
        return v[((static_cast<size_t>(ni) * c + ci) * h + y) * w + x];
    }
    T at(int ni, int ci, int y, int x) const {
        return v[((static_cast<size_t>(ni) * c + ci) * h + y) * w + x];
    }

    T* chan(int ni, int ci) { return v.data() + (static_cast<size_t>(ni) * c + ci) * plane(); }
    const T* chan(int ni, int ci) const { return v.data() + (static_cast<size_t>(ni) * c + ci) * plane(); }

    bool same_shape(const Tensor4& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }

    void alloc_grad() { grad.assign(v.size(), T(0)); }
    void zero_grad() { if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0)); }
    bool has_grad() const { return !grad.empty(); }

    bool all_finite() const {
        for (const T& x : v)
            if (!std::isfinite(static_cast<double>(x))) return false;
        return true;
    }

    std::string shape_str() const {
        return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
               std::to_string(h) + "," + std::to_string(w) + ")";
    }
};

namespace detail {

// Seeded standard normal, independent of the stdlib distribution
// implementation so checkpoints reproduce across toolchains.
class NormalSampler {
public:
    explicit NormalSampler(uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 1e-300) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * M_PI * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    double uniform01() {
        return (rng_() >> 11) * (1.0 / 9007199254740992.0);   // 53-bit mantissa
    }

    uint64_t raw() { return rng_(); }

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace detail

} // namespace esisr
