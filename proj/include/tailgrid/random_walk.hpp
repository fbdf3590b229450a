#pragma once

#include <cstdint>
#include <random>

#include "tailgrid/compound.hpp"
#include "tailgrid/diagnostics.hpp"

namespace tailgrid {

// Ladder-height decomposition of a negative-drift random walk: the ladder
// measure nu = 1_{(0,inf)} sum_n n^{-1} G^{*n}, its mass B, the defective
// ladder-height rate lambda = 1 - e^{-B}, and the first ascending ladder
// height law G0 = -lambda^{-1} sum_n ((-1)^n / n!) nu^{*n}.
struct LadderDecomposition {
    GridMeasure nu;
    double B = 0.0;
    double lambda = 0.0;
    GridDistribution g0;
    long long series_n = 0;
    double truncation_residual = 0.0;
    bool residual_is_heuristic = false;
    double renormalization = 1.0;
    double left_window_absorbed = 0.0;
};

struct LadderOptions {
    long long n_max = 400;
    double tol = 1e-10;
    double max_height = 0.0;   // working window top; 0 picks a default
    double left_window = 0.0;  // depth below which paths are absorbed; 0 picks a default
};

namespace detail {

// Chernoff decay rate inf_t E[e^{t X}] over a t grid; returns >= 1 when no
// useful exponential moment is found (heuristic residual then applies).
inline double chernoff_rate(const GridDistribution& g) {
    if (g.right_excess() > 1e-12) return 1.0;
    double sup = g.lattice().sup();
    double t_hi = sup > 0.0 ? 600.0 / sup : 50.0;
    double t_lo = 1e-4;
    double best = 1.0;
    for (int i = 0; i < 400; ++i) {
        double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / 399.0);
        double m = 0.0;
        for (std::size_t k = 0; k < g.mass().size(); ++k) {
            double mass = g.mass()[k];
            if (mass == 0.0) continue;
            m += mass * std::exp(t * g.lattice().position(static_cast<std::ptrdiff_t>(k)));
            if (!(m < 1e300)) break;
        }
        m += g.left_excess() * std::exp(t * g.lattice().origin());
        if (m < best) best = m;
    }
    return best;
}

}  // namespace detail

inline LadderDecomposition ladder_decompose(const GridDistribution& g, LadderOptions opt = {}) {
    if (opt.n_max < 10) fail(ErrorCode::invalid_argument, "ladder: n_max must be at least 10");
    if (!(opt.tol > 0.0)) fail(ErrorCode::invalid_argument, "ladder: tol must be positive");
    const Lattice& lat = g.lattice();
    double h = lat.span();
    if (!lat.aligned(0.0))
        fail(ErrorCode::invalid_argument, "ladder: walk lattice must be aligned to zero");

    // Drift estimate with the excess penalized toward zero drift: right
    // excess at the grid top, left excess at the grid origin.
    if (g.right_excess() > 1e-6)
        fail(ErrorCode::no_negative_drift,
             "ladder: right excess too large to certify a negative mean");
    double mean_upper = g.grid_mean() + g.right_excess() * std::max(lat.sup(), 0.0) +
                        g.left_excess() * lat.origin();
    if (!(mean_upper < 0.0))
        fail(ErrorCode::no_negative_drift, "ladder: walk mean is not negative");

    double width = lat.sup() - lat.origin();
    double top = opt.max_height > 0.0 ? opt.max_height : std::max(8.0 * width, 32.0 * h);
    top = h * std::ceil(top / h - 1e-9);
    double bottom = -(opt.left_window > 0.0 ? opt.left_window : 2.0 * top + width);
    bottom = h * std::floor(bottom / h + 1e-9);

    auto top_cells = static_cast<std::size_t>(std::llround(top / h));
    Lattice nu_lat(0.0, h, top_cells);  // atoms h .. top
    std::vector<double> nu_cells(top_cells, 0.0);
    double nu_spill = 0.0;
    double B = 0.0;
    double left_absorbed = 0.0;
    double p_last = 0.0;

    GridDistribution walk = g;
    for (long long n = 1; n <= opt.n_max; ++n) {
        if (n > 1) {
            walk = convolve(walk, g);
            if (walk.lattice().sup() > top + lat.align_tol()) walk = cap_right(walk, top);
            if (walk.lattice().sup() <= bottom + lat.align_tol()) break;  // fully absorbed
            if (walk.lattice().origin() < bottom - lat.align_tol())
                walk = cap_left(walk, bottom);
        }
        double wn = 1.0 / static_cast<double>(n);
        double p_n = walk.right_excess();
        const Lattice& wl = walk.lattice();
        auto off = static_cast<std::ptrdiff_t>(std::llround(wl.origin() / h)) + 1;
        for (std::size_t k = 0; k < walk.mass().size(); ++k) {
            double pos_idx = static_cast<double>(off + static_cast<std::ptrdiff_t>(k));
            if (pos_idx <= 0.0) continue;
            double m = walk.mass()[k];
            if (m == 0.0) continue;
            p_n += m;
            auto idx = static_cast<std::size_t>(off + static_cast<std::ptrdiff_t>(k) - 1);
            nu_cells[idx] += wn * m;
        }
        nu_spill += wn * walk.right_excess();
        B += wn * p_n;
        p_last = p_n;
    }
    left_absorbed = walk.left_excess() +
                    (walk.lattice().sup() <= bottom + lat.align_tol() ? walk.grid_mass() : 0.0);

    LadderDecomposition out{GridMeasure(nu_lat, nu_cells),
                            B,
                            -std::expm1(-B),
                            delta_at(h, h),
                            opt.n_max,
                            0.0,
                            false,
                            1.0,
                            left_absorbed};

    double rho = detail::chernoff_rate(g);
    if (rho < 1.0) {
        double nmax1 = static_cast<double>(opt.n_max + 1);
        out.truncation_residual = std::pow(rho, nmax1) / (nmax1 * (1.0 - rho));
    } else {
        out.truncation_residual = p_last / static_cast<double>(opt.n_max);
        out.residual_is_heuristic = true;
    }
    if (out.truncation_residual > 100.0 * opt.tol)
        fail(ErrorCode::ladder_not_converged,
             "ladder: truncation residual " + std::to_string(out.truncation_residual) +
                 " above 100*tol; raise n_max");

    if (B < 1e-12) {
        // the walk never rises: lambda = 0 and the supremum is delta_0; G0 is
        // an arbitrary placeholder on the positive half line
        out.lambda = 0.0;
        return out;
    }

    // G0 via the alternating exponential series over nu^{*n}, run on the
    // normalized nu so each term is a distribution n-fold.
    std::vector<double> nu_hat = nu_cells;
    for (double& v : nu_hat) v /= B;
    GridDistribution nu_dist(nu_lat, std::move(nu_hat), 0.0, nu_spill / B);
    detail::SignedAccumulator acc;
    GridDistribution term = nu_dist;
    double bn = B;          // B^n / n!
    double lgn = 1.0;       // n!
    long long n_terms = 0;
    for (long long n = 1;; ++n) {
        double coeff = ((n % 2 == 1) ? 1.0 : -1.0) * bn / (lgn * out.lambda);
        acc.add(coeff, term);
        n_terms = n;
        double next_total = bn * B / (lgn * static_cast<double>(n + 1));
        if (next_total < opt.tol * out.lambda || n > 500) break;
        term = convolve(term, nu_dist);
        if (term.lattice().sup() > top + lat.align_tol()) term = cap_right(term, top);
        bn *= B;
        lgn *= static_cast<double>(n + 1);
    }
    out.renormalization = acc.clamp_and_normalize(std::max(opt.tol * 100.0, 1e-12), "ladder G0");
    out.g0 = acc.build();
    out.series_n = n_terms;
    return out;
}

// pi = sum_n (1-lambda) lambda^n G0^{*n}: the supremum law of the walk.
inline GridDistribution supremum_distribution(const LadderDecomposition& ld, double tol) {
    if (ld.lambda <= 0.0) return convolution_identity(ld.g0);
    return compound_geometric(ld.lambda, ld.g0, tol);
}

// Seeded step sampler drawing from the atoms of a gridded step law by inverse
// CDF, so the Monte Carlo oracle walks exactly the distribution the ladder
// pipeline decomposes.
class GridStepSampler {
  public:
    explicit GridStepSampler(const GridDistribution& g) : lattice_(g.lattice()) {
        if (g.left_excess() + g.right_excess() > 1e-9)
            fail(ErrorCode::invalid_argument, "step sampler needs a fully on-grid law");
        cum_.reserve(g.mass().size());
        double run = 0.0;
        for (double m : g.mass()) {
            run += m;
            cum_.push_back(run);
        }
    }

    double operator()(std::mt19937_64& rng) const {
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        double target = u * cum_.back();
        auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
        auto k = static_cast<std::ptrdiff_t>(it - cum_.begin());
        if (k >= static_cast<std::ptrdiff_t>(cum_.size()))
            k = static_cast<std::ptrdiff_t>(cum_.size()) - 1;
        return lattice_.position(k);
    }

  private:
    Lattice lattice_;
    std::vector<double> cum_;
};

struct McSupremumResult {
    GridDistribution empirical;
    std::size_t cap_hits = 0;
    std::size_t paths = 0;
};

// Monte Carlo supremum oracle. A path stops once it falls
// 50 * span * ceil(1/drift_margin) below its running maximum (or at 1e6
// steps; such cap hits are counted and more than 1% of them is an error).
// Path i is seeded with seed xor i, so results do not depend on scheduling.
template <class Sampler>
McSupremumResult mc_supremum(const Sampler& sampler, std::size_t n_paths, double drift_margin,
                             std::uint64_t seed, const Lattice& target) {
    if (n_paths == 0) fail(ErrorCode::invalid_argument, "mc_supremum: need at least one path");
    if (!(drift_margin > 0.0))
        fail(ErrorCode::invalid_argument, "mc_supremum: drift margin must be positive");
    double h = target.span();
    double drawdown = 50.0 * h * std::ceil(1.0 / drift_margin);
    constexpr std::size_t kStepCap = 1000000;

    std::vector<double> counts(target.len(), 0.0);
    double above = 0.0;
    std::size_t cap_hits = 0;
    std::ptrdiff_t zero_cell =
        static_cast<std::ptrdiff_t>(std::ceil((0.0 - target.origin()) / h - 1e-9)) - 1;
    if (zero_cell < 0 || zero_cell >= static_cast<std::ptrdiff_t>(target.len()))
        fail(ErrorCode::invalid_argument, "mc_supremum: target lattice must contain zero");

    for (std::size_t i = 0; i < n_paths; ++i) {
        std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(i));
        double s = 0.0;
        double m = 0.0;
        std::size_t steps = 0;
        while (s > m - drawdown) {
            if (++steps > kStepCap) {
                ++cap_hits;
                break;
            }
            s += sampler(rng);
            if (s > m) m = s;
        }
        if (m <= 0.0) {
            counts[static_cast<std::size_t>(zero_cell)] += 1.0;
        } else {
            auto k = static_cast<std::ptrdiff_t>(std::ceil((m - target.origin()) / h - 1e-9)) - 1;
            if (k >= static_cast<std::ptrdiff_t>(target.len()))
                above += 1.0;
            else
                counts[static_cast<std::size_t>(k)] += 1.0;
        }
    }
    if (100 * cap_hits > n_paths)
        fail(ErrorCode::unreliable_oracle, "mc_supremum: more than 1% of paths hit the step cap");
    double scale = 1.0 / static_cast<double>(n_paths);
    for (double& c : counts) c *= scale;
    return McSupremumResult{GridDistribution(target, std::move(counts), 0.0, above * scale),
                            cap_hits, n_paths};
}

// Theorem-style ratio check for randomly stopped sums:
// P(S_tau in x+Delta) / F(x+Delta) -> E[tau].
inline DiagnosticReport stopped_sum_ratio_check(const GridDistribution& f,
                                                const std::vector<double>& tau_pmf,
                                                const ProbeSchedule& sched, double rel_tol) {
    double mean_tau = 0.0;
    for (std::size_t n = 0; n < tau_pmf.size(); ++n)
        mean_tau += static_cast<double>(n) * tau_pmf[n];
    if (!(mean_tau > 0.0))
        fail(ErrorCode::invalid_argument, "stopped sum check: E[tau] must be positive");
    GridDistribution ft = randomly_stopped_sum(tau_pmf, f);
    auto rep = check_asymptotic_ratio(IntervalSource(ft), IntervalSource(f), mean_tau, sched,
                                      rel_tol);
    rep.check = "stopped_sum_ratio";
    return rep;
}

}  // namespace tailgrid
