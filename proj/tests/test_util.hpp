#pragma once

#include <gtest/gtest.h>

#include <functional>

#include "oracles.hpp"
#include "tailgrid/grid_distribution.hpp"

namespace test_util {

using tailgrid::GridDistribution;
using tailgrid::Lattice;

// Exact discretization from an analytic CDF: cell k gets F(right] - F(left].
inline GridDistribution grid_from_cdf(const std::function<double(double)>& cdf,
                                      const Lattice& lat) {
    std::vector<double> mass(lat.len());
    for (std::size_t k = 0; k < lat.len(); ++k)
        mass[k] = cdf(lat.right_edge(static_cast<std::ptrdiff_t>(k))) -
                  cdf(lat.left_edge(static_cast<std::ptrdiff_t>(k)));
    double lx = cdf(lat.origin());
    double rx = 1.0 - cdf(lat.sup());
    return GridDistribution(lat, std::move(mass), lx, rx);
}

// Discretization from the survival function; well conditioned in the far
// tail, where 1 - F(x) underflows against the CDF's rounding to 1.
inline GridDistribution grid_from_survival(const std::function<double(double)>& surv,
                                           const Lattice& lat) {
    std::vector<double> mass(lat.len());
    for (std::size_t k = 0; k < lat.len(); ++k)
        mass[k] = surv(lat.left_edge(static_cast<std::ptrdiff_t>(k))) -
                  surv(lat.right_edge(static_cast<std::ptrdiff_t>(k)));
    double lx = 1.0 - surv(lat.origin());
    double rx = surv(lat.sup());
    return GridDistribution(lat, std::move(mass), lx, rx);
}

inline GridDistribution pareto_grid(double alpha, double xm, double span, std::size_t len) {
    return grid_from_survival([=](double x) { return oracles::pareto_tail(x, alpha, xm); },
                              Lattice(xm, span, len));
}

inline GridDistribution exp_grid(double rate, double span, std::size_t len) {
    return grid_from_survival([=](double x) { return oracles::exp_tail(x, rate); },
                              Lattice(0.0, span, len));
}

// Compare two distributions cell-by-cell after aligning atom positions on
// their common step; absent cells count as zero mass.
inline void expect_aligned_near(const GridDistribution& a, const GridDistribution& b,
                                double tol) {
    ASSERT_TRUE(a.lattice().compatible_with(b.lattice()));
    double h = a.lattice().span();
    auto shift = static_cast<std::ptrdiff_t>(
        std::llround((a.lattice().origin() - b.lattice().origin()) / h));
    auto lo = std::min<std::ptrdiff_t>(shift, 0);
    auto hi = std::max<std::ptrdiff_t>(shift + static_cast<std::ptrdiff_t>(a.lattice().len()),
                                       static_cast<std::ptrdiff_t>(b.lattice().len()));
    for (std::ptrdiff_t j = lo; j < hi; ++j) {
        std::ptrdiff_t ka = j - shift;
        double va = (ka >= 0 && ka < static_cast<std::ptrdiff_t>(a.lattice().len()))
                        ? a.mass()[static_cast<std::size_t>(ka)]
                        : 0.0;
        double vb = (j >= 0 && j < static_cast<std::ptrdiff_t>(b.lattice().len()))
                        ? b.mass()[static_cast<std::size_t>(j)]
                        : 0.0;
        ASSERT_NEAR(va, vb, tol) << "at aligned index " << j;
    }
}

}  // namespace test_util
