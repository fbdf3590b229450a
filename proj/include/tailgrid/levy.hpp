#pragma once

#include <cmath>
#include <functional>
#include <optional>

#include "tailgrid/compound.hpp"

namespace tailgrid {

namespace detail {

inline double simpson9(const std::function<double(double)>& f, double a, double b) {
    static constexpr double w[9] = {1, 4, 2, 4, 2, 4, 2, 4, 1};
    double h = (b - a) / 8.0;
    double acc = 0.0;
    for (int j = 0; j <= 8; ++j) acc += w[j] * f(a + h * j);
    return acc * h / 3.0;
}

// Integral over (0-adjacent) intervals with a possible power singularity at
// the left end: geometric panels toward `a`.
inline double integrate_singular_left(const std::function<double(double)>& f, double a, double b) {
    if (!(b > a)) return 0.0;
    double acc = 0.0;
    double hi = b;
    for (int k = 0; k < 200; ++k) {
        double lo = a + (hi - a) * 0.5;
        double panel = simpson9(f, lo, hi);
        acc += panel;
        hi = lo;
        if (std::abs(panel) < 1e-17 * (std::abs(acc) + 1e-300) && k > 8) break;
    }
    return acc;
}

// Integral over (a, infinity) with doubling panels; f must decay.
inline double integrate_tail(const std::function<double(double)>& f, double a, double hi) {
    double acc = 0.0;
    double lo = a;
    double width = std::max(a, 1.0);
    for (int k = 0; k < 400 && lo < hi; ++k) {
        double up = std::min(lo + width, hi);
        double panel = simpson9(f, lo, up);
        acc += panel;
        lo = up;
        width *= 2.0;
        if (std::abs(panel) < 1e-16 * (std::abs(acc) + 1e-300)) break;
    }
    return acc;
}

}  // namespace detail

// Jump density with explicit support bounds (0 excluded via the cutoff).
struct LevyDensity {
    std::function<double(double)> g;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
};

// Levy triplet (a, b^2, nu). The jump measure is supplied either analytically
// or pre-gridded; small jumps below the cutoff are folded into the Gaussian
// factor by variance matching.
struct LevyTriplet {
    double drift = 0.0;
    double gauss_var = 0.0;
    std::optional<LevyDensity> density;
    std::optional<GridMeasure> jump_measure;
    double small_jump_cutoff = 0.0;  // 0: derive a default from the grid
};

// nu_(1): the restriction of nu to (1, infinity), normalized to a probability.
inline GridDistribution normalized_tail_measure(const GridMeasure& nu) {
    const Lattice& lat = nu.lattice();
    std::ptrdiff_t j0 = lat.boundary_index(1.0);
    double m = 0.0;
    for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(j0, 0);
         k < static_cast<std::ptrdiff_t>(lat.len()); ++k)
        m += nu.mass()[static_cast<std::size_t>(k)];
    if (!(m > 0.0)) fail(ErrorCode::degenerate_measure, "no measure mass above 1");
    std::ptrdiff_t start = std::max<std::ptrdiff_t>(j0, 0);
    std::vector<double> mass(nu.mass().begin() + start, nu.mass().end());
    for (double& v : mass) v /= m;
    Lattice out(lat.left_edge(start), lat.span(), mass.size());
    return GridDistribution(out, std::move(mass), 0.0, 0.0);
}

// Compound Poisson driven by the truncated measure nu_{c1} = nu on (c1, inf).
inline GridDistribution truncated_cp(const GridMeasure& nu, double c1, double tol,
                                     double support_cap = detail::kNoCap) {
    if (!(c1 > 1.0)) fail(ErrorCode::invalid_argument, "truncated_cp: c1 must exceed 1");
    const Lattice& lat = nu.lattice();
    std::ptrdiff_t j0 = lat.boundary_index(c1);
    double lambda = 0.0;
    for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(j0, 0);
         k < static_cast<std::ptrdiff_t>(lat.len()); ++k)
        lambda += nu.mass()[static_cast<std::size_t>(k)];
    if (!(lambda > 0.0)) fail(ErrorCode::degenerate_measure, "no measure mass above c1");
    std::ptrdiff_t start = std::max<std::ptrdiff_t>(j0, 0);
    std::vector<double> mass(nu.mass().begin() + start, nu.mass().end());
    for (double& v : mass) v /= lambda;
    Lattice jl(lat.left_edge(start), lat.span(), mass.size());
    GridDistribution jump(jl, std::move(mass), 0.0, 0.0);
    return compound_poisson(lambda, jump, tol, support_cap);
}

namespace detail {

// Effective cutoff: the triplet's epsilon rounded up to a cell boundary, at
// least one cell, defaulting so that around 20 cells sit below it.
inline double effective_cutoff(const LevyTriplet& t, double span) {
    double eps = t.small_jump_cutoff;
    if (eps <= 0.0) eps = std::max(0.05 * span * std::ceil(1.0 / span), 20.0 * span);
    if (eps < span - 1e-12 * span)
        fail(ErrorCode::invalid_argument,
             "small-jump cutoff below one lattice cell; the cell at 0 must stay empty");
    return span * std::ceil(eps / span - 1e-9);
}

struct JumpSplit {
    std::vector<double> big_mass;   // on the working lattice
    double tail_above_grid = 0.0;   // analytic mass beyond the grid top
    double lambda = 0.0;            // total big-jump intensity
    double sigma2_small = 0.0;      // int_{|x|<=eps} x^2 nu(dx)
    // Compensation of the gridded atoms with |pos| <= 1. Compensating the
    // atoms rather than the analytic integral keeps the compensated band at
    // exactly zero mean on the grid, so refining the cutoff does not
    // accumulate discretization drift.
    double compensation = 0.0;
};

inline JumpSplit split_jumps(const LevyTriplet& t, const Lattice& lat, double eps) {
    JumpSplit out;
    out.big_mass.assign(lat.len(), 0.0);
    if (t.density) {
        const auto& d = *t.density;
        auto g = [&](double x) {
            double v = d.g(x);
            if (v < 0.0 || !std::isfinite(v))
                fail(ErrorCode::invalid_density, "Levy density negative or non-finite");
            return v;
        };
        for (std::size_t k = 0; k < lat.len(); ++k) {
            double a = lat.left_edge(static_cast<std::ptrdiff_t>(k));
            double b = lat.right_edge(static_cast<std::ptrdiff_t>(k));
            bool positive_side = a >= eps - lat.align_tol();
            bool negative_side = b <= -eps + lat.align_tol();
            if (!positive_side && !negative_side) continue;
            double lo = std::max(a, d.lo), hi = std::min(b, d.hi);
            if (hi <= lo) continue;
            double m = simpson9(g, lo, hi);
            out.big_mass[k] = m;
            out.lambda += m;
            double pos = lat.position(static_cast<std::ptrdiff_t>(k));
            if (std::abs(pos) <= 1.0 + lat.align_tol()) out.compensation += pos * m;
        }
        if (d.hi > lat.sup()) {
            out.tail_above_grid = integrate_tail(g, lat.sup(), d.hi);
            out.lambda += out.tail_above_grid;
        }
        // small-jump variance below the cutoff
        double pos_lo = std::max(0.0, d.lo), pos_hi = std::min(eps, d.hi);
        if (pos_hi > pos_lo)
            out.sigma2_small += integrate_singular_left([&](double x) { return x * x * g(x); },
                                                        pos_lo, pos_hi);
        double neg_hi = std::min(0.0, d.hi), neg_lo = std::max(-eps, d.lo);
        if (neg_hi > neg_lo)
            out.sigma2_small += integrate_singular_left(
                [&](double x) { return x * x * g(-x); }, -neg_hi, -neg_lo);
    } else if (t.jump_measure) {
        const GridMeasure& nu = *t.jump_measure;
        if (!nu.lattice().compatible_with(lat))
            fail(ErrorCode::lattice_mismatch, "jump measure lattice incompatible with target");
        auto off = static_cast<std::ptrdiff_t>(
            std::llround((nu.lattice().origin() - lat.origin()) / lat.span()));
        for (std::size_t k = 0; k < nu.mass().size(); ++k) {
            double m = nu.mass()[k];
            if (m == 0.0) continue;
            double pos = nu.lattice().position(static_cast<std::ptrdiff_t>(k));
            if (std::abs(pos) <= eps + lat.align_tol()) {
                out.sigma2_small += pos * pos * m;
                continue;
            }
            if (std::abs(pos) <= 1.0 + lat.align_tol()) out.compensation += pos * m;
            auto idx = off + static_cast<std::ptrdiff_t>(k);
            if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(lat.len()))
                fail(ErrorCode::grid_overflow, "jump measure extends beyond the target grid");
            out.big_mass[static_cast<std::size_t>(idx)] += m;
            out.lambda += m;
        }
    } else {
        out.lambda = 0.0;
    }
    if (!std::isfinite(out.lambda) || !std::isfinite(out.sigma2_small))
        fail(ErrorCode::invalid_argument,
             "Levy measure fails the (1 ^ x^2) integrability check on the grid");
    return out;
}

// Gaussian factor with exact cell masses (CDF differences).
inline GridDistribution gaussian_on_grid(double mean, double var, const Lattice& lat,
                                         double tol) {
    if (var <= 0.0) {
        // Degenerate factor: point mass at the cell containing the mean.
        double h = lat.span();
        auto k = static_cast<std::ptrdiff_t>(std::ceil((mean - lat.origin()) / h - 1e-9)) - 1;
        return GridDistribution(Lattice(lat.left_edge(k), h, 1), {1.0}, 0.0, 0.0);
    }
    double sd = std::sqrt(var);
    auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0))); };
    std::vector<double> mass(lat.len());
    for (std::size_t k = 0; k < lat.len(); ++k)
        mass[k] = cdf(lat.right_edge(static_cast<std::ptrdiff_t>(k))) -
                  cdf(lat.left_edge(static_cast<std::ptrdiff_t>(k)));
    double lx = cdf(lat.origin());
    double rx = 1.0 - cdf(lat.sup());
    if (lx > tol || rx > tol)
        fail(ErrorCode::grid_overflow, "grid too narrow for the Gaussian factor at this tol");
    return GridDistribution(lat, std::move(mass), lx, rx);
}

}  // namespace detail

// Grid the big-jump part of the triplet's Levy measure onto `lat` (used by the
// ratio diagnostics of the ID theorems).
inline GridMeasure grid_levy_measure(const LevyTriplet& t, const Lattice& lat) {
    double eps = detail::effective_cutoff(t, lat.span());
    auto split = detail::split_jumps(t, lat, eps);
    return GridMeasure(lat, std::move(split.big_mass));
}

// Builds the ID law with characteristic exponent
//   int (e^{izy} - 1 - izy 1_{|y|<=1}) nu(dy) + iaz - b^2 z^2 / 2
// as Gaussian(a_adj, b^2 + sigma_eps^2) * CompoundPoisson(nu restricted to
// |y| > eps), where jumps below the cutoff contribute their variance to the
// Gaussian factor and a_adj = a - int_{eps<|y|<=1} y nu(dy).
inline GridDistribution id_distribution(const LevyTriplet& t, const Lattice& lat, double tol) {
    if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "id_distribution: tol must be > 0");
    if (t.gauss_var < 0.0)
        fail(ErrorCode::invalid_argument, "id_distribution: negative Gaussian variance");
    double eps = detail::effective_cutoff(t, lat.span());
    auto split = detail::split_jumps(t, lat, eps);
    double a_adj = t.drift - split.compensation;
    double var = t.gauss_var + split.sigma2_small;
    GridDistribution gauss = detail::gaussian_on_grid(a_adj, var, lat, tol);
    if (var <= 0.0 &&
        (gauss.lattice().sup() > lat.sup() + lat.align_tol() ||
         gauss.lattice().origin() < lat.origin() - lat.align_tol()))
        fail(ErrorCode::grid_overflow, "degenerate Gaussian factor falls outside the grid");
    if (split.lambda <= 0.0) return gauss;

    std::vector<double> jump_mass = split.big_mass;
    for (double& m : jump_mass) m /= split.lambda;
    GridDistribution jump(lat, std::move(jump_mass), 0.0,
                          split.tail_above_grid / split.lambda);
    GridDistribution cp = compound_poisson(split.lambda, jump, tol, lat.sup());
    GridDistribution out = convolve(gauss, cp);
    if (out.lattice().sup() > lat.sup()) out = cap_right(out, lat.sup());
    if (out.lattice().origin() < lat.origin() - lat.align_tol())
        out = cap_left(out, lat.origin());
    return out;
}

// Monotone Levy density certificate: g non-increasing on (0, inf) and
// non-decreasing on (-inf, 0), checked at every grid node above the cutoffs.
struct SsdMeasure {
    GridMeasure measure;
    bool monotone_certificate = false;
};

inline SsdMeasure s_sd_levy_measure(const std::function<double(double)>& g_plus,
                                    const std::function<double(double)>& g_minus,
                                    const Lattice& lat, double cutoff_pos, double cutoff_neg) {
    if (!(cutoff_pos > 0.0) || !(cutoff_neg > 0.0))
        fail(ErrorCode::invalid_argument, "s_sd_levy_measure: cutoffs must be positive");
    std::vector<double> mass(lat.len(), 0.0);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lat.len(); ++k) {
        double a = lat.left_edge(static_cast<std::ptrdiff_t>(k));
        double b = lat.right_edge(static_cast<std::ptrdiff_t>(k));
        if (a < cutoff_pos - lat.align_tol()) continue;
        double va = g_plus(a);
        if (va > prev * (1.0 + 1e-12))
            fail(ErrorCode::not_s_self_decomposable,
                 "density increases on the positive half line at x=" + std::to_string(a));
        prev = va;
        mass[k] = detail::simpson9(g_plus, a, b);
    }
    prev = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lat.len(); ++k) {
        double a = lat.left_edge(static_cast<std::ptrdiff_t>(k));
        double b = lat.right_edge(static_cast<std::ptrdiff_t>(k));
        if (b > -cutoff_neg + lat.align_tol()) break;
        double va = g_minus(a);
        if (va < prev * (1.0 - 1e-12) - 1e-300)
            fail(ErrorCode::not_s_self_decomposable,
                 "density decreases on the negative half line at x=" + std::to_string(a));
        prev = va;
        mass[k] = detail::simpson9(g_minus, a, b);
    }
    return SsdMeasure{GridMeasure(lat, std::move(mass)), true};
}

}  // namespace tailgrid
