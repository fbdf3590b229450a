// Closed-form and brute-force oracles used by the test suites. Everything in
// this header is independent of the library code paths it is used to check:
// interval probabilities come from analytic CDFs, convolutions from the
// O(n^2) definition or a separate Fourier-domain construction, integrals from
// an adaptive Simpson rule.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <fftw3.h>

namespace oracles {

// ---- analytic CDFs / tails -------------------------------------------------

inline double exp_cdf(double x, double rate = 1.0) {
    return x <= 0 ? 0.0 : 1.0 - std::exp(-rate * x);
}
inline double exp_tail(double x, double rate = 1.0) {
    return x <= 0 ? 1.0 : std::exp(-rate * x);
}

inline double pareto_cdf(double x, double alpha, double xm) {
    return x <= xm ? 0.0 : 1.0 - std::pow(xm / x, alpha);
}
inline double pareto_tail(double x, double alpha, double xm) {
    return x <= xm ? 1.0 : std::pow(xm / x, alpha);
}
inline double pareto_pdf(double x, double alpha, double xm) {
    return x <= xm ? 0.0 : alpha * std::pow(xm, alpha) * std::pow(x, -alpha - 1.0);
}

inline double gamma2_cdf(double x) {  // Gamma(2,1) = Exp(1)*Exp(1)
    return x <= 0 ? 0.0 : 1.0 - std::exp(-x) * (1.0 + x);
}

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

inline double laplace_cdf(double x) {
    return x < 0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
}

// ---- discrete pmfs ----------------------------------------------------------

inline double poisson_pmf(long long k, double lambda) {
    return std::exp(-lambda + k * std::log(lambda) - std::lgamma(double(k) + 1.0));
}

inline double binomial_pmf(long long k, long long n, double p) {
    double logc = std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
                  std::lgamma(double(n - k) + 1.0);
    return std::exp(logc + k * std::log(p) + (n - k) * std::log1p(-p));
}

inline double geometric_pmf(long long k, double lambda) {  // (1-l) l^k, k >= 0
    return (1.0 - lambda) * std::pow(lambda, double(k));
}

inline double neg_binomial_pmf(long long k, double a, double lambda) {
    double logc = std::lgamma(a + double(k)) - std::lgamma(a) - std::lgamma(double(k) + 1.0);
    return std::exp(logc + a * std::log1p(-lambda) + k * std::log(lambda));
}

// ---- adaptive Simpson quadrature -------------------------------------------

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}
inline double adapt(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(f, a, m, fa, flm, fm);
    double right = simpson(f, m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = detail::simpson(f, a, b, fa, fm, fb);
    return detail::adapt(f, a, b, fa, fm, fb, whole, tol, 48);
}

// ---- Fourier-exponential compound Poisson ----------------------------------
//
// Builds exp(lambda*(G_hat - 1)) on a circular lattice of size n (a power of
// two) directly in the Fourier domain. `offsets` are atom positions in lattice
// steps relative to zero (may be negative; they wrap modulo n).
inline std::vector<double> fourier_compound_poisson(const std::vector<long long>& offsets,
                                                    const std::vector<double>& weights,
                                                    double lambda, std::size_t n) {
    std::vector<std::complex<double>> buf(n, 0.0);
    auto* io = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan fwd = fftw_plan_dft_1d(static_cast<int>(n), io, io, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_plan inv = fftw_plan_dft_1d(static_cast<int>(n), io, io, FFTW_BACKWARD, FFTW_ESTIMATE);
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        long long idx = offsets[i] % static_cast<long long>(n);
        if (idx < 0) idx += static_cast<long long>(n);
        buf[static_cast<std::size_t>(idx)] += weights[i];
    }
    fftw_execute(fwd);
    for (auto& z : buf) z = std::exp(lambda * (z - 1.0));
    fftw_execute(inv);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real() / static_cast<double>(n);
    return out;
}

}  // namespace oracles
