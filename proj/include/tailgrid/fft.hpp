#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "tailgrid/errors.hpp"

namespace tailgrid::detail {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// FFTW real transforms with a per-size plan cache. The FFTW planner is not
// thread safe, so every entry point serializes on one mutex; operations stay
// pure and deterministic (FFTW_ESTIMATE plans do not depend on timing).
class RealFft {
  public:
    // Linear convolution of a and b, length a.size()+b.size()-1, via
    // zero-padding to the next power of two.
    static std::vector<double> convolve(const std::vector<double>& a,
                                        const std::vector<double>& b) {
        std::size_t out_len = a.size() + b.size() - 1;
        std::size_t n = next_pow2(out_len);
        std::lock_guard<std::mutex> lock(mutex());
        Plans& p = plans(n);

        std::copy(a.begin(), a.end(), p.real);
        std::fill(p.real + a.size(), p.real + n, 0.0);
        fftw_execute(p.fwd);
        std::copy(&p.spec[0][0], &p.spec[0][0] + 2 * (n / 2 + 1), &p.spec2[0][0]);

        std::copy(b.begin(), b.end(), p.real);
        std::fill(p.real + b.size(), p.real + n, 0.0);
        fftw_execute(p.fwd);

        for (std::size_t k = 0; k < n / 2 + 1; ++k) {
            double re = p.spec[k][0] * p.spec2[k][0] - p.spec[k][1] * p.spec2[k][1];
            double im = p.spec[k][0] * p.spec2[k][1] + p.spec[k][1] * p.spec2[k][0];
            p.spec[k][0] = re;
            p.spec[k][1] = im;
        }
        fftw_execute(p.inv);
        std::vector<double> out(out_len);
        double scale = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < out_len; ++i) out[i] = p.real[i] * scale;
        return out;
    }

  private:
    struct Plans {
        std::size_t n = 0;
        double* real = nullptr;
        fftw_complex* spec = nullptr;
        fftw_complex* spec2 = nullptr;
        fftw_plan fwd = nullptr;
        fftw_plan inv = nullptr;

        explicit Plans(std::size_t size) : n(size) {
            real = fftw_alloc_real(n);
            spec = fftw_alloc_complex(n / 2 + 1);
            spec2 = fftw_alloc_complex(n / 2 + 1);
            if (!real || !spec || !spec2)
                fail(ErrorCode::numerical_failure, "FFT buffer allocation failed");
            fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spec, FFTW_ESTIMATE);
            inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real, FFTW_ESTIMATE);
            if (!fwd || !inv) fail(ErrorCode::numerical_failure, "FFT planning failed");
        }
        Plans(const Plans&) = delete;
        Plans& operator=(const Plans&) = delete;
        ~Plans() {
            if (fwd) fftw_destroy_plan(fwd);
            if (inv) fftw_destroy_plan(inv);
            fftw_free(real);
            fftw_free(spec);
            fftw_free(spec2);
        }
    };

    static std::mutex& mutex() {
        static std::mutex m;
        return m;
    }

    static Plans& plans(std::size_t n) {
        static std::map<std::size_t, std::unique_ptr<Plans>> cache;
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, std::make_unique<Plans>(n)).first;
        return *it->second;
    }
};

}  // namespace tailgrid::detail
