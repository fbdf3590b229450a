#pragma once

#include <memory>
#include <string>

#include "tailgrid/grid_distribution.hpp"

namespace tailgrid {

// Reference families with closed-form tails. Cell masses come from survival
// differences, which stay exact deep into the tail where CDF differences
// would cancel.
enum class FamilyKind { pareto, lognormal, weibull, exponential, two_sided, lattice_zeta, point };

struct FamilySpec {
    FamilyKind kind = FamilyKind::exponential;
    double p1 = 1.0;     // pareto: alpha | lognormal: m | weibull: shape | exp: rate
                         // lattice_zeta: s | point: location
    double p2 = 1.0;     // pareto: x_m | lognormal: s | weibull: scale
    double p_pos = 0.5;  // two_sided: weight of the positive component
    std::shared_ptr<FamilySpec> pos;  // two_sided: positive-half component
    std::shared_ptr<FamilySpec> neg;  // two_sided: reflected component (given positive-half)
    std::optional<Lattice> grid;

    static FamilySpec pareto(double alpha, double xm, Lattice lat) {
        if (!(alpha > 0.0) || !(xm > 0.0))
            fail(ErrorCode::invalid_argument, "pareto needs alpha > 0 and x_m > 0");
        return FamilySpec{FamilyKind::pareto, alpha, xm, 0.5, nullptr, nullptr, lat};
    }
    static FamilySpec lognormal(double m, double s, Lattice lat) {
        if (!(s > 0.0)) fail(ErrorCode::invalid_argument, "lognormal needs s > 0");
        return FamilySpec{FamilyKind::lognormal, m, s, 0.5, nullptr, nullptr, lat};
    }
    static FamilySpec weibull(double shape, double scale, Lattice lat) {
        // shape >= 1 leaves the heavy-tailed regime and would mislabel the
        // ground truth, so it is rejected outright
        if (!(shape > 0.0) || !(shape < 1.0))
            fail(ErrorCode::invalid_argument, "weibull shape must be in (0,1)");
        if (!(scale > 0.0)) fail(ErrorCode::invalid_argument, "weibull needs scale > 0");
        return FamilySpec{FamilyKind::weibull, shape, scale, 0.5, nullptr, nullptr, lat};
    }
    static FamilySpec exponential(double rate, Lattice lat) {
        if (!(rate > 0.0)) fail(ErrorCode::invalid_argument, "exponential needs rate > 0");
        return FamilySpec{FamilyKind::exponential, rate, 0.0, 0.5, nullptr, nullptr, lat};
    }
    static FamilySpec lattice_zeta(double s, Lattice lat) {
        if (!(s > 1.0)) fail(ErrorCode::invalid_argument, "lattice_zeta needs s > 1");
        return FamilySpec{FamilyKind::lattice_zeta, s, 0.0, 0.5, nullptr, nullptr, lat};
    }
    static FamilySpec point(double loc, Lattice lat) {
        return FamilySpec{FamilyKind::point, loc, 0.0, 0.5, nullptr, nullptr, lat};
    }
    static FamilySpec two_sided(FamilySpec positive, FamilySpec negative, double p_pos,
                                Lattice lat) {
        if (!(p_pos > 0.0) || !(p_pos < 1.0))
            fail(ErrorCode::invalid_argument, "two_sided weight must be in (0,1)");
        if (positive.kind == FamilyKind::two_sided || negative.kind == FamilyKind::two_sided)
            fail(ErrorCode::invalid_argument, "two_sided nests only one level");
        FamilySpec s;
        s.kind = FamilyKind::two_sided;
        s.p_pos = p_pos;
        s.pos = std::make_shared<FamilySpec>(std::move(positive));
        s.neg = std::make_shared<FamilySpec>(std::move(negative));
        s.grid = lat;
        return s;
    }
};

namespace detail {

inline double zeta_tail(double s, double k) {
    return std::pow(k, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(k, -s) +
           s * std::pow(k, -s - 1.0) / 12.0;
}

inline double riemann_zeta(double s) {
    double acc = 0.0;
    for (int k = 1; k <= 1000; ++k) acc += std::pow(static_cast<double>(k), -s);
    return acc + zeta_tail(s, 1000.0);
}

// Survival function of a positive-half family.
inline double family_survival(const FamilySpec& spec, double x) {
    switch (spec.kind) {
        case FamilyKind::pareto:
            return x <= spec.p2 ? 1.0 : std::pow(spec.p2 / x, spec.p1);
        case FamilyKind::lognormal:
            return x <= 0.0 ? 1.0
                            : 0.5 * std::erfc((std::log(x) - spec.p1) /
                                              (spec.p2 * std::sqrt(2.0)));
        case FamilyKind::weibull:
            return x <= 0.0 ? 1.0 : std::exp(-std::pow(x / spec.p2, spec.p1));
        case FamilyKind::exponential:
            return x <= 0.0 ? 1.0 : std::exp(-spec.p1 * x);
        default:
            fail(ErrorCode::invalid_argument, "family has no closed-form survival function");
    }
}

}  // namespace detail

inline GridDistribution instantiate(const FamilySpec& spec) {
    if (!spec.grid) fail(ErrorCode::invalid_argument, "family spec carries no grid");
    const Lattice& lat = *spec.grid;
    std::vector<double> mass(lat.len(), 0.0);

    if (spec.kind == FamilyKind::point) {
        double h = lat.span();
        auto k = static_cast<std::ptrdiff_t>(std::ceil((spec.p1 - lat.origin()) / h - 1e-9)) - 1;
        if (k < 0 || k >= static_cast<std::ptrdiff_t>(lat.len()))
            fail(ErrorCode::grid_overflow, "point location outside the grid");
        mass[static_cast<std::size_t>(k)] = 1.0;
        return GridDistribution(lat, std::move(mass), 0.0, 0.0);
    }

    if (spec.kind == FamilyKind::lattice_zeta) {
        if (std::abs(lat.span() - 1.0) > 1e-12)
            fail(ErrorCode::invalid_argument, "lattice_zeta requires unit span");
        double z = detail::riemann_zeta(spec.p1);
        double top_k = 0.0;
        for (std::size_t k = 0; k < lat.len(); ++k) {
            double pos = lat.position(static_cast<std::ptrdiff_t>(k));
            if (pos >= 1.0) {
                mass[k] = std::pow(pos, -spec.p1) / z;
                top_k = pos;
            }
        }
        if (top_k < 1.0) fail(ErrorCode::grid_overflow, "grid has no lattice points >= 1");
        double rx = detail::zeta_tail(spec.p1, top_k) / z;
        return GridDistribution(lat, std::move(mass), 0.0, rx);
    }

    // continuous families: survival differences
    std::function<double(double)> surv;
    if (spec.kind == FamilyKind::two_sided) {
        const FamilySpec pos = *spec.pos;
        const FamilySpec neg = *spec.neg;
        double p = spec.p_pos;
        surv = [pos, neg, p](double x) {
            return x >= 0.0 ? p * detail::family_survival(pos, x)
                            : 1.0 - (1.0 - p) * detail::family_survival(neg, -x);
        };
    } else {
        const FamilySpec self = spec;
        surv = [self](double x) { return detail::family_survival(self, x); };
    }
    for (std::size_t k = 0; k < lat.len(); ++k)
        mass[k] = surv(lat.left_edge(static_cast<std::ptrdiff_t>(k))) -
                  surv(lat.right_edge(static_cast<std::ptrdiff_t>(k)));
    double lx = 1.0 - surv(lat.origin());
    double rx = surv(lat.sup());
    if (lx + rx > 0.2)
        fail(ErrorCode::grid_overflow, "grid too narrow: more than 20% of the mass is outside");
    return GridDistribution(lat, std::move(mass), lx, rx);
}

// Ground-truth class labels from standard heavy-tail theory; the diagnostics
// batteries are scored against these.
struct ClassLabels {
    bool l_delta = false;
    bool s_delta = false;
    bool s_loc = false;
    bool ani = false;  // F(x+Delta) asymptotic to a non-increasing function
    bool ald = false;  // F(x+Delta) almost decreasing
    std::string source;
};

inline ClassLabels expected_class(const FamilySpec& spec) {
    switch (spec.kind) {
        case FamilyKind::pareto:
            return {true, true, true, true, true, "regularly varying tail"};
        case FamilyKind::lognormal:
            return {true, true, true, true, true, "classical subexponential family"};
        case FamilyKind::weibull:
            return {true, true, true, true, true, "stretched-exponential tail, shape < 1"};
        case FamilyKind::exponential:
            return {false, false, false, true, true,
                    "interval ratio e^{-y}; intervals are monotone"};
        case FamilyKind::lattice_zeta:
            return {true, true, false, true, true,
                    "regularly varying on the integers; fractional windows are empty"};
        case FamilyKind::point:
            return {false, false, false, false, false, "degenerate"};
        case FamilyKind::two_sided: {
            ClassLabels pos = expected_class(*spec.pos);
            pos.source = "positive component dominates the right tail (" + pos.source + ")";
            return pos;
        }
    }
    fail(ErrorCode::invalid_argument, "unlabeled family");
}

}  // namespace tailgrid
