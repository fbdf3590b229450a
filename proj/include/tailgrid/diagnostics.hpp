#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tailgrid/convolution.hpp"

namespace tailgrid {

// Probe locations for tail diagnostics. Limits are along x -> infinity;
// geometric spacing (doubling) exposes slowly varying corrections, which is
// what the convergence heuristic keys on.
struct ProbeSchedule {
    std::vector<double> x_points;  // strictly increasing, at least 8
    std::vector<double> shifts;    // positive shifts y for long-tail checks
    DeltaWindow window{1.0};
    double x0 = 0.0;

    static ProbeSchedule geometric(double x_start, double factor, std::size_t count,
                                   std::vector<double> shift_list, double window_width,
                                   double x0 = 0.0) {
        ProbeSchedule s{{}, std::move(shift_list), DeltaWindow(window_width), x0};
        double x = x_start;
        for (std::size_t i = 0; i < count; ++i) {
            s.x_points.push_back(x);
            x *= factor;
        }
        return s;
    }

    // Evenly spaced probes; used on lattice walks where the working window is
    // too short for eight doublings.
    static ProbeSchedule arithmetic(double x_start, double step, std::size_t count,
                                    std::vector<double> shift_list, double window_width,
                                    double x0 = 0.0) {
        ProbeSchedule s{{}, std::move(shift_list), DeltaWindow(window_width), x0};
        for (std::size_t i = 0; i < count; ++i)
            s.x_points.push_back(x_start + step * static_cast<double>(i));
        return s;
    }

    void validate_for(const Lattice& lat) const {
        if (x_points.size() < 8)
            fail(ErrorCode::invalid_argument, "schedule needs at least 8 probe points");
        for (std::size_t i = 0; i < x_points.size(); ++i) {
            if (!lat.aligned(x_points[i]))
                fail(ErrorCode::misaligned_window, "probe point not lattice-aligned");
            if (i > 0 && !(x_points[i] > x_points[i - 1]))
                fail(ErrorCode::invalid_argument, "probe points must be strictly increasing");
        }
        for (double y : shifts) {
            if (!(y > 0.0) || !lat.aligned(lat.origin() + y))
                fail(ErrorCode::misaligned_window, "shift not positive or not lattice-aligned");
        }
        window.cells_on(lat);
    }
};

enum class Trend { converging, diverging, oscillating, inconclusive };
enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Trend t) {
    switch (t) {
        case Trend::converging: return "converging";
        case Trend::diverging: return "diverging";
        case Trend::oscillating: return "oscillating";
        default: return "inconclusive";
    }
}

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        default: return "inconclusive";
    }
}

// Auditable result of one check: the full ratio trace, never a bare boolean.
struct DiagnosticReport {
    std::string check;
    std::vector<double> probes;               // probes that produced ratios
    std::vector<double> columns;              // shift values (or n for Kesten)
    std::vector<std::vector<double>> ratios;  // [probe][column]
    double target = std::numeric_limits<double>::quiet_NaN();
    double limit_estimate = std::numeric_limits<double>::quiet_NaN();
    Trend trend = Trend::inconclusive;
    Verdict verdict = Verdict::inconclusive;
    std::optional<double> certificate;
    double excess_contamination = 0.0;
    std::size_t dropped_probes = 0;
    bool hypothesis_unverified = false;
};

// Either a distribution or a measure as a window-mass source.
class IntervalSource {
  public:
    IntervalSource(const GridDistribution& f) : dist_(&f) {}
    IntervalSource(const GridMeasure& m) : meas_(&m) {}

    WindowMass operator()(double x, DeltaWindow w) const {
        return dist_ ? interval_mass(*dist_, x, w) : interval_mass(*meas_, x, w);
    }
    const Lattice& lattice() const { return dist_ ? dist_->lattice() : meas_->lattice(); }

  private:
    const GridDistribution* dist_ = nullptr;
    const GridMeasure* meas_ = nullptr;
};

namespace detail {

// Trend of a ratio sequence from its last few successive changes. The
// sequence converging says nothing about WHERE it converges; the verdict
// couples trend with distance to target.
inline Trend classify_trend(const std::vector<double>& r) {
    if (r.size() < 3) return Trend::inconclusive;
    std::vector<double> diff;
    std::size_t from = r.size() > 5 ? r.size() - 5 : 0;
    for (std::size_t i = from + 1; i < r.size(); ++i) diff.push_back(r[i] - r[i - 1]);
    auto mag = [&](std::size_t i) { return std::abs(diff[i]); };
    std::size_t m = diff.size();
    double scale = std::abs(r.back()) + 1e-300;
    if (m >= 2) {
        bool shrinking = true, growing = true;
        for (std::size_t i = m - 1; i > 0 && i > m - 3; --i) {
            shrinking = shrinking && mag(i) <= 1.2 * mag(i - 1) + 1e-14 * scale;
            growing = growing && mag(i) > 1.2 * mag(i - 1) + 1e-14 * scale;
        }
        bool alternating = m >= 3 && diff[m - 1] * diff[m - 2] < 0.0 &&
                           diff[m - 2] * diff[m - 3] < 0.0 &&
                           mag(m - 1) > 0.5 * mag(m - 3);
        if (alternating && !shrinking) return Trend::oscillating;
        if (shrinking) return Trend::converging;
        if (growing) return Trend::diverging;
    }
    return Trend::inconclusive;
}

// Shared verdict logic for target-mode checks. `agg` is the per-probe
// aggregated ratio (trend input); `dev` the per-probe worst relative
// deviation from target.
inline void finish_target_mode(DiagnosticReport& rep, const std::vector<double>& agg,
                               const std::vector<double>& dev, double target, double rel_tol) {
    rep.target = target;
    std::size_t n = agg.size();
    if (n == 0) return;
    std::size_t tail = std::min<std::size_t>(3, n);
    double sum = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) sum += agg[i];
    rep.limit_estimate = sum / static_cast<double>(tail);
    rep.trend = classify_trend(agg);
    if (rep.dropped_probes > rep.probes.size()) {
        rep.verdict = Verdict::inconclusive;
        return;
    }
    if (n < 3) {
        rep.verdict = Verdict::inconclusive;
        return;
    }
    double worst_recent = 0.0;
    double best_recent = std::numeric_limits<double>::infinity();
    for (std::size_t i = n - tail; i < n; ++i) {
        worst_recent = std::max(worst_recent, dev[i]);
        best_recent = std::min(best_recent, dev[i]);
    }
    if (rep.trend == Trend::converging && worst_recent <= rel_tol &&
        rep.excess_contamination < 0.1) {
        rep.verdict = Verdict::pass;
    } else if (rep.trend == Trend::diverging ||
               (rep.trend == Trend::converging && dev[n - 1] > 3.0 * rel_tol) ||
               best_recent > 3.0 * rel_tol) {
        // fail when confidently off target: diverging, converged to the wrong
        // limit, or every recent probe far from target regardless of trend
        rep.verdict = Verdict::fail;
    } else {
        rep.verdict = Verdict::inconclusive;
    }
}

struct Contamination {
    double excess = 0.0;
    double total = 0.0;
    void take(const WindowMass& wm) {
        excess += wm.from_excess;
        total += wm.total;
    }
    double fraction() const { return total > 0.0 ? excess / total : 0.0; }
};

}  // namespace detail

// Ratio check num(x+Delta)/den(x+Delta) against a finite positive target.
inline DiagnosticReport check_asymptotic_ratio(const IntervalSource& num,
                                               const IntervalSource& den, double target,
                                               const ProbeSchedule& sched, double rel_tol) {
    if (!(target > 0.0) || !std::isfinite(target))
        fail(ErrorCode::invalid_argument, "ratio target must be finite and positive");
    sched.validate_for(den.lattice());
    DiagnosticReport rep;
    rep.check = "ratio";
    rep.columns = {0.0};
    detail::Contamination cont;
    std::vector<double> agg, dev;
    for (double x : sched.x_points) {
        WindowMass d = den(x, sched.window);
        WindowMass u = num(x, sched.window);
        if (!(d.total > 0.0) || d.from_excess >= 0.5 * d.total) {
            ++rep.dropped_probes;  // no real grid mass under this window
            continue;
        }
        cont.take(d);
        cont.take(u);
        double r = u.total / d.total;
        rep.probes.push_back(x);
        rep.ratios.push_back({r});
        agg.push_back(r);
        dev.push_back(std::abs(r - target) / target);
    }
    rep.excess_contamination = cont.fraction();
    detail::finish_target_mode(rep, agg, dev, target, rel_tol);
    if (2 * rep.dropped_probes > sched.x_points.size()) rep.verdict = Verdict::inconclusive;
    return rep;
}

// Boundedness check (the paper's asymp-equivalence "asymp" mode): min/max of
// the last third of ratios must stay inside [1/bound, bound].
inline DiagnosticReport check_bounded_ratio(const IntervalSource& num, const IntervalSource& den,
                                            const ProbeSchedule& sched, double bound = 100.0) {
    if (!(bound > 1.0)) fail(ErrorCode::invalid_argument, "bound must exceed 1");
    sched.validate_for(den.lattice());
    DiagnosticReport rep;
    rep.check = "bounded_ratio";
    rep.columns = {0.0};
    detail::Contamination cont;
    for (double x : sched.x_points) {
        WindowMass d = den(x, sched.window);
        WindowMass u = num(x, sched.window);
        if (!(d.total > 0.0) || d.from_excess >= 0.5 * d.total) {
            ++rep.dropped_probes;
            continue;
        }
        cont.take(d);
        cont.take(u);
        rep.probes.push_back(x);
        rep.ratios.push_back({u.total / d.total});
    }
    rep.excess_contamination = cont.fraction();
    std::size_t n = rep.probes.size();
    if (n < 3) {
        rep.verdict = Verdict::inconclusive;
        return rep;
    }
    std::size_t from = n - std::max<std::size_t>(1, n / 3);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = from; i < n; ++i) {
        lo = std::min(lo, rep.ratios[i][0]);
        hi = std::max(hi, rep.ratios[i][0]);
    }
    rep.limit_estimate = rep.ratios[n - 1][0];
    rep.trend = detail::classify_trend([&] {
        std::vector<double> r;
        for (const auto& row : rep.ratios) r.push_back(row[0]);
        return r;
    }());
    if (lo >= 1.0 / bound && hi <= bound && rep.excess_contamination < 0.1)
        rep.verdict = Verdict::pass;
    else if (hi < 1.0 / bound || lo > bound)
        rep.verdict = Verdict::fail;
    else
        rep.verdict = Verdict::inconclusive;
    return rep;
}

// Long-tailedness in the Delta sense: F(x+y+Delta)/F(x+Delta) -> 1 for every
// shift y.
inline DiagnosticReport check_long_tailed_delta(const GridDistribution& f,
                                                const ProbeSchedule& sched, double rel_tol) {
    sched.validate_for(f.lattice());
    if (sched.shifts.empty())
        fail(ErrorCode::invalid_argument, "long-tail check needs at least one shift");
    DiagnosticReport rep;
    rep.check = "l_delta";
    rep.columns = sched.shifts;
    detail::Contamination cont;
    std::vector<double> agg, dev;
    for (double x : sched.x_points) {
        WindowMass d = interval_mass(f, x, sched.window);
        if (!(d.total > 0.0) || d.from_excess >= 0.5 * d.total) {
            ++rep.dropped_probes;
            continue;
        }
        cont.take(d);
        std::vector<double> row;
        double mean = 0.0, worst = 0.0;
        for (double y : sched.shifts) {
            WindowMass u = interval_mass(f, x + y, sched.window);
            cont.take(u);
            double r = u.total / d.total;
            row.push_back(r);
            mean += r;
            worst = std::max(worst, std::abs(r - 1.0));
        }
        mean /= static_cast<double>(sched.shifts.size());
        rep.probes.push_back(x);
        rep.ratios.push_back(std::move(row));
        agg.push_back(mean);
        dev.push_back(worst);
    }
    rep.excess_contamination = cont.fraction();
    detail::finish_target_mode(rep, agg, dev, 1.0, rel_tol);
    if (2 * rep.dropped_probes > sched.x_points.size()) rep.verdict = Verdict::inconclusive;
    return rep;
}

// Delta-subexponentiality needs both the doubling ratio and long-tailedness;
// the composite carries both reports.
struct SubexpResult {
    DiagnosticReport doubling;   // F^{*2}(x+Delta) / F(x+Delta) -> 2
    DiagnosticReport long_tail;  // companion membership requirement
    Verdict verdict = Verdict::inconclusive;
};

inline SubexpResult check_subexp_delta(const GridDistribution& f, const ProbeSchedule& sched,
                                       double rel_tol) {
    sched.validate_for(f.lattice());
    GridDistribution f2 = convolve(f, f);
    SubexpResult out;
    out.doubling = check_asymptotic_ratio(IntervalSource(f2), IntervalSource(f), 2.0, sched,
                                          rel_tol);
    out.doubling.check = "s_delta";
    out.long_tail = check_long_tailed_delta(f, sched, rel_tol);
    if (out.doubling.verdict == Verdict::pass && out.long_tail.verdict == Verdict::pass)
        out.verdict = Verdict::pass;
    else if (out.doubling.verdict == Verdict::fail || out.long_tail.verdict == Verdict::fail)
        out.verdict = Verdict::fail;
    return out;
}

// Local subexponentiality: S_Delta for every window width in c_list.
struct LocalSubexpResult {
    std::vector<double> window_widths;
    std::vector<SubexpResult> per_window;
    Verdict verdict = Verdict::pass;
};

inline LocalSubexpResult check_locally_subexp(const GridDistribution& f,
                                              const std::vector<double>& c_list,
                                              const ProbeSchedule& sched_template,
                                              double rel_tol) {
    if (c_list.empty()) fail(ErrorCode::invalid_argument, "empty window list");
    LocalSubexpResult out;
    bool any_fail = false, any_open = false;
    for (double c : c_list) {
        ProbeSchedule sched = sched_template;
        sched.window = DeltaWindow(c);
        auto res = check_subexp_delta(f, sched, rel_tol);
        any_fail = any_fail || res.verdict == Verdict::fail;
        any_open = any_open || res.verdict == Verdict::inconclusive;
        out.window_widths.push_back(c);
        out.per_window.push_back(std::move(res));
    }
    out.verdict = any_fail ? Verdict::fail : (any_open ? Verdict::inconclusive : Verdict::pass);
    return out;
}

using FunctionSamples = std::vector<std::pair<double, double>>;  // (x, alpha(x))

namespace detail {

inline std::vector<std::pair<double, double>> samples_above(const FunctionSamples& samples,
                                                            double x0) {
    std::vector<std::pair<double, double>> kept;
    for (const auto& [x, a] : samples) {
        if (x < x0) continue;
        if (!(a > 0.0) || !std::isfinite(a))
            fail(ErrorCode::invalid_function,
                 "function sample must be positive and finite above x0");
        kept.emplace_back(x, a);
    }
    if (kept.size() < 32)
        fail(ErrorCode::invalid_argument, "need at least 32 samples above x0");
    return kept;
}

}  // namespace detail

// Asymptotic-to-non-increasing check: the running suffix-sup and prefix-inf
// must both become asymptotically equal to the function.
inline DiagnosticReport check_ani(const FunctionSamples& samples, double x0, double rel_tol) {
    auto kept = detail::samples_above(samples, x0);
    std::size_t n = kept.size();
    std::vector<double> suffix_sup(n);
    double run = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        run = std::max(run, kept[i].second);
        suffix_sup[i] = run;
    }
    DiagnosticReport rep;
    rep.check = "ani";
    rep.columns = {0.0, 1.0};  // column 0: sup ratio, column 1: inf ratio
    std::vector<double> agg, dev;
    double prefix_inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        prefix_inf = std::min(prefix_inf, kept[i].second);
        double rs = suffix_sup[i] / kept[i].second;
        double ri = kept[i].second / prefix_inf;
        rep.probes.push_back(kept[i].first);
        rep.ratios.push_back({rs, ri});
        agg.push_back(0.5 * (rs + ri));
        dev.push_back(std::max(rs - 1.0, ri - 1.0));
    }
    detail::finish_target_mode(rep, agg, dev, 1.0, rel_tol);
    return rep;
}

// Almost-decreasing check. The certificate K-hat is the largest observed
// ratio alpha(x')/alpha(x) over sampled pairs x < x'; the verdict keys on
// whether K-hat has stabilized over the sample rather than on any fixed K.
inline DiagnosticReport check_ald(const FunctionSamples& samples, double x0) {
    auto kept = detail::samples_above(samples, x0);
    std::size_t n = kept.size();
    DiagnosticReport rep;
    rep.check = "ald";
    rep.columns = {0.0};
    double run_min = std::numeric_limits<double>::infinity();
    double k_hat = 1.0;
    std::vector<double> prefix_k(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) k_hat = std::max(k_hat, kept[i].second / run_min);
        run_min = std::min(run_min, kept[i].second);
        prefix_k[i] = k_hat;
        rep.probes.push_back(kept[i].first);
        rep.ratios.push_back({k_hat});
    }
    rep.certificate = k_hat;
    rep.limit_estimate = k_hat;
    double k_half = prefix_k[n / 2];
    double k1 = prefix_k[n / 3];
    double k2 = prefix_k[(2 * n) / 3];
    double k3 = k_hat;
    if (k_half >= 0.9 * k_hat) {
        rep.verdict = Verdict::pass;
        rep.trend = Trend::converging;
    } else if (k3 > 1.05 * k2 && k2 > 1.05 * k1) {
        rep.verdict = Verdict::fail;
        rep.trend = Trend::diverging;
    } else {
        rep.verdict = Verdict::inconclusive;
        rep.trend = Trend::inconclusive;
    }
    return rep;
}

// Empirical Kesten certificate: c-hat = max over probes and n <= n_max of
// F^{*n}(x+Delta) / ((1+eps)^n F(x+Delta)). A maximizer well inside the n
// range indicates the geometric bound holds with that constant.
inline DiagnosticReport kesten_certificate(const GridDistribution& f, const ProbeSchedule& sched,
                                           double eps, long long n_max) {
    if (n_max < 2) fail(ErrorCode::invalid_argument, "kesten: n_max must be at least 2");
    if (!(eps > 0.0)) fail(ErrorCode::invalid_argument, "kesten: eps must be positive");
    sched.validate_for(f.lattice());
    DiagnosticReport rep;
    rep.check = "kesten";
    auto sub = check_subexp_delta(f, sched, 0.05);
    rep.hypothesis_unverified = sub.verdict != Verdict::pass;

    std::vector<double> den;
    std::vector<double> kept_probes;
    for (double x : sched.x_points) {
        WindowMass d = interval_mass(f, x, sched.window);
        if (!(d.total > 0.0) || d.from_excess >= 0.5 * d.total) {
            ++rep.dropped_probes;
            continue;
        }
        kept_probes.push_back(x);
        den.push_back(d.total);
    }
    rep.probes = kept_probes;
    rep.ratios.assign(kept_probes.size(), {});

    double cap = kept_probes.empty()
                     ? f.lattice().sup()
                     : kept_probes.back() + sched.window.c + f.lattice().span();
    bool can_cap = f.positive_half();
    GridDistribution power = f;
    std::vector<double> per_n_max;
    double c_hat = 0.0;
    long long argmax_n = 0;
    double growth = 1.0 + eps;
    double geom = growth;
    for (long long n = 1; n <= n_max; ++n) {
        if (n > 1) {
            power = convolve(power, f);
            if (can_cap && power.lattice().sup() > cap) power = cap_right(power, cap);
            geom *= growth;
        }
        double level_max = 0.0;
        for (std::size_t i = 0; i < kept_probes.size(); ++i) {
            WindowMass u = interval_mass(power, kept_probes[i], sched.window);
            double r = u.total / ((n == 1 ? growth : geom) * den[i]);
            rep.ratios[i].push_back(r);
            level_max = std::max(level_max, r);
            if (r > c_hat) {
                c_hat = r;
                argmax_n = n;
            }
        }
        rep.columns.push_back(static_cast<double>(n));
        per_n_max.push_back(level_max);
    }
    rep.certificate = c_hat;
    rep.limit_estimate = c_hat;
    std::size_t m = per_n_max.size();
    bool grew_at_end = m >= 3 && per_n_max[m - 1] > per_n_max[m - 2] &&
                       per_n_max[m - 2] > per_n_max[m - 3];
    if (argmax_n <= n_max / 2 && !kept_probes.empty()) {
        rep.verdict = Verdict::pass;
        rep.trend = Trend::converging;
    } else if (argmax_n == n_max && grew_at_end) {
        rep.verdict = Verdict::fail;
        rep.trend = Trend::diverging;
    } else {
        rep.verdict = Verdict::inconclusive;
        rep.trend = Trend::inconclusive;
    }
    return rep;
}

// Convenience: sample F(x+Delta) on an arithmetic ladder (feeds the a.n.i.
// and al.d. checks).
inline FunctionSamples interval_samples(const GridDistribution& f, double x_from, double step,
                                        std::size_t count, DeltaWindow w) {
    FunctionSamples out;
    for (std::size_t i = 0; i < count; ++i) {
        double x = x_from + step * static_cast<double>(i);
        out.emplace_back(x, interval_prob(f, x, w));
    }
    return out;
}

}  // namespace tailgrid
