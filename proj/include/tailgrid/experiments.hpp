#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailgrid/compound.hpp"
#include "tailgrid/diagnostics.hpp"
#include "tailgrid/families.hpp"
#include "tailgrid/levy.hpp"
#include "tailgrid/random_walk.hpp"
#include "tailgrid/report_io.hpp"
#include "tailgrid/triplet_io.hpp"

namespace tailgrid {

using json = nlohmann::json;

struct NamedReport {
    std::string name;
    DiagnosticReport report;
};

struct ExperimentOutput {
    std::vector<NamedReport> reports;
    std::vector<std::pair<std::string, GridDistribution>> distributions;
};

struct CliOverrides {
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> probes;
    bool quiet = false;
};

namespace detail {

inline double jreq(const json& j, const char* key) {
    if (!j.contains(key))
        fail(ErrorCode::invalid_argument, std::string("config: missing field '") + key + "'");
    if (!j.at(key).is_number())
        fail(ErrorCode::invalid_argument, std::string("config: field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

inline double jget(const json& j, const char* key, double fallback) {
    return j.contains(key) ? jreq(j, key) : fallback;
}

}  // namespace detail

inline Lattice lattice_from_json(const json& j) {
    return Lattice(detail::jreq(j, "origin"), detail::jreq(j, "span"),
                   static_cast<std::size_t>(detail::jreq(j, "len")));
}

inline FamilySpec family_from_json(const json& j) {
    if (!j.contains("kind") || !j.at("kind").is_string())
        fail(ErrorCode::invalid_argument, "config: family needs a string 'kind'");
    std::string kind = j.at("kind").get<std::string>();
    auto grid = [&]() -> Lattice {
        if (!j.contains("grid"))
            fail(ErrorCode::invalid_argument, "config: family '" + kind + "' needs a grid");
        return lattice_from_json(j.at("grid"));
    };
    if (kind == "pareto")
        return FamilySpec::pareto(detail::jreq(j, "alpha"), detail::jreq(j, "xm"), grid());
    if (kind == "lognormal")
        return FamilySpec::lognormal(detail::jreq(j, "m"), detail::jreq(j, "s"), grid());
    if (kind == "weibull")
        return FamilySpec::weibull(detail::jreq(j, "shape"), detail::jreq(j, "scale"), grid());
    if (kind == "exponential") return FamilySpec::exponential(detail::jreq(j, "rate"), grid());
    if (kind == "lattice_zeta") return FamilySpec::lattice_zeta(detail::jreq(j, "s"), grid());
    if (kind == "point") return FamilySpec::point(detail::jreq(j, "loc"), grid());
    if (kind == "two_sided") {
        if (!j.contains("pos") || !j.contains("neg"))
            fail(ErrorCode::invalid_argument, "config: two_sided needs 'pos' and 'neg'");
        json pos = j.at("pos");
        json neg = j.at("neg");
        // nested components only need family parameters; give them stub grids
        if (!pos.contains("grid")) pos["grid"] = {{"origin", 0.0}, {"span", 1.0}, {"len", 1}};
        if (!neg.contains("grid")) neg["grid"] = {{"origin", 0.0}, {"span", 1.0}, {"len", 1}};
        return FamilySpec::two_sided(family_from_json(pos), family_from_json(neg),
                                     detail::jreq(j, "p_pos"), grid());
    }
    fail(ErrorCode::invalid_argument, "config: unknown family kind '" + kind + "'");
}

inline ProbeSchedule schedule_from_json(const json& j, const CliOverrides& ov) {
    if (!j.is_object()) fail(ErrorCode::invalid_argument, "config: 'schedule' must be an object");
    std::vector<double> shifts;
    if (j.contains("shifts"))
        for (const auto& v : j.at("shifts")) shifts.push_back(v.get<double>());
    if (shifts.empty()) shifts = {1.0, 2.0, 4.0};
    auto count = static_cast<std::size_t>(detail::jget(j, "count", 8));
    if (ov.probes) count = *ov.probes;
    if (j.contains("step"))
        return ProbeSchedule::arithmetic(detail::jreq(j, "x_start"), detail::jreq(j, "step"),
                                         count, shifts, detail::jget(j, "window", 1.0),
                                         detail::jget(j, "x0", 0.0));
    return ProbeSchedule::geometric(detail::jreq(j, "x_start"), detail::jget(j, "factor", 2.0),
                                    count, shifts, detail::jget(j, "window", 1.0),
                                    detail::jget(j, "x0", 0.0));
}

inline LevyTriplet triplet_from_json(const json& j) {
    TripletDoc doc;
    doc.a = detail::jget(j, "a", 0.0);
    doc.b2 = detail::jget(j, "b2", 0.0);
    doc.cutoff = detail::jget(j, "cutoff", 0.0);
    if (j.contains("density")) {
        const json& d = j.at("density");
        if (!d.contains("family") || !d.at("family").is_string())
            fail(ErrorCode::invalid_argument, "config: triplet density needs a 'family'");
        doc.family = d.at("family").get<std::string>();
        for (auto it = d.begin(); it != d.end(); ++it)
            if (it.key() != "family") doc.params[it.key()] = it.value().get<double>();
    } else if (j.contains("measure_csv")) {
        doc.measure_csv = j.at("measure_csv").get<std::string>();
    } else {
        fail(ErrorCode::invalid_argument, "config: triplet needs 'density' or 'measure_csv'");
    }
    return to_triplet(doc);
}

// ---- batteries ---------------------------------------------------------------

// Class diagnostics for one reference family.
inline ExperimentOutput run_diagnose(const json& cfg, const CliOverrides& ov) {
    ExperimentOutput out;
    auto spec = family_from_json(cfg.at("family"));
    auto f = instantiate(spec);
    auto sched = schedule_from_json(cfg.at("schedule"), ov);
    double rel_tol = detail::jget(cfg, "rel_tol", 0.05);
    auto sub = check_subexp_delta(f, sched, rel_tol);
    out.reports.push_back({"l_delta", sub.long_tail});
    out.reports.push_back({"s_delta", sub.doubling});
    double from = detail::jget(cfg, "samples_from", sched.x_points.front());
    double step = detail::jget(cfg, "samples_step", f.lattice().span() * 16);
    auto count = static_cast<std::size_t>(detail::jget(cfg, "samples_count", 128));
    auto samples = interval_samples(f, from, step, count, sched.window);
    out.reports.push_back({"ani", check_ani(samples, from, rel_tol)});
    out.reports.push_back({"ald", check_ald(samples, from)});
    out.distributions.emplace_back("f", f);
    return out;
}

// Compound Poisson tail equivalence: S_Delta transfer between mu and G plus
// the ratio limit mu(x+Delta)/G(x+Delta) -> lambda.
inline ExperimentOutput run_cp_theorem(const json& cfg, const CliOverrides& ov) {
    ExperimentOutput out;
    double lambda = detail::jreq(cfg, "lambda");
    auto g = instantiate(family_from_json(cfg.at("family")));
    auto sched = schedule_from_json(cfg.at("schedule"), ov);
    double rel_tol = detail::jget(cfg, "rel_tol", 0.05);
    double tol = detail::jget(cfg, "series_tol", 1e-10);
    auto mu = compound_poisson(lambda, g, tol, g.lattice().sup());
    auto sub_g = check_subexp_delta(g, sched, rel_tol);
    auto sub_mu = check_subexp_delta(mu, sched, rel_tol);
    out.reports.push_back({"l_delta_g", sub_g.long_tail});
    out.reports.push_back({"s_delta_g", sub_g.doubling});
    out.reports.push_back({"s_delta_mu", sub_mu.doubling});
    out.reports.push_back(
        {"ratio_mu_g", check_asymptotic_ratio(IntervalSource(mu), IntervalSource(g), lambda,
                                              sched, rel_tol)});
    out.distributions.emplace_back("g", g);
    out.distributions.emplace_back("mu", mu);
    return out;
}

// ID tail equivalence via the normalized Levy measure.
inline ExperimentOutput run_id_theorem(const json& cfg, const CliOverrides& ov) {
    ExperimentOutput out;
    auto t = triplet_from_json(cfg.at("triplet"));
    Lattice lat = lattice_from_json(cfg.at("grid"));
    auto sched = schedule_from_json(cfg.at("schedule"), ov);
    double rel_tol = detail::jget(cfg, "rel_tol", 0.05);
    double tol = detail::jget(cfg, "series_tol", 1e-10);
    auto mu = id_distribution(t, lat, tol);
    auto nu = grid_levy_measure(t, lat);
    auto nu1 = normalized_tail_measure(nu);
    auto sub_nu1 = check_subexp_delta(nu1, sched, rel_tol);
    out.reports.push_back({"l_delta_nu1", sub_nu1.long_tail});
    out.reports.push_back({"s_delta_nu1", sub_nu1.doubling});
    out.reports.push_back(
        {"ratio_mu_nu", check_asymptotic_ratio(IntervalSource(mu), IntervalSource(nu), 1.0,
                                               sched, rel_tol)});
    out.distributions.emplace_back("mu", mu);
    out.distributions.emplace_back("nu1", nu1);
    return out;
}

// Local subexponentiality battery over a list of window widths.
inline ExperimentOutput run_local_theorem(const json& cfg, const CliOverrides& ov) {
    ExperimentOutput out;
    double lambda = detail::jreq(cfg, "lambda");
    auto g = instantiate(family_from_json(cfg.at("family")));
    auto sched = schedule_from_json(cfg.at("schedule"), ov);
    double rel_tol = detail::jget(cfg, "rel_tol", 0.05);
    double tol = detail::jget(cfg, "series_tol", 1e-10);
    std::vector<double> c_list;
    for (const auto& v : cfg.at("c_list")) c_list.push_back(v.get<double>());
    auto mu = compound_poisson(lambda, g, tol, g.lattice().sup());
    auto loc_g = check_locally_subexp(g, c_list, sched, rel_tol);
    auto loc_mu = check_locally_subexp(mu, c_list, sched, rel_tol);
    for (std::size_t i = 0; i < c_list.size(); ++i) {
        std::string suffix = "_c" + std::to_string(i);
        out.reports.push_back({"s_delta_g" + suffix, loc_g.per_window[i].doubling});
        out.reports.push_back({"s_delta_mu" + suffix, loc_mu.per_window[i].doubling});
        ProbeSchedule s = sched;
        s.window = DeltaWindow(c_list[i]);
        out.reports.push_back(
            {"ratio_mu_g" + suffix, check_asymptotic_ratio(IntervalSource(mu), IntervalSource(g),
                                                           lambda, s, rel_tol)});
    }
    out.distributions.emplace_back("mu", mu);
    return out;
}

// Compound negative binomial: F_a(x+Delta) ~ a lambda/(1-lambda) G(x+Delta).
inline ExperimentOutput run_nb_theorem(const json& cfg, const CliOverrides& ov) {
    ExperimentOutput out;
    double a = detail::jreq(cfg, "a");
    double lambda = detail::jreq(cfg, "lambda");
    auto g = instantiate(family_from_json(cfg.at("family")));
    auto sched = schedule_from_json(cfg.at("schedule"), ov);
    double rel_tol = detail::jget(cfg, "rel_tol", 0.05);
    double tol = detail::jget(cfg, "series_tol", 1e-10);
    auto fa = compound_negative_binomial(a, lambda, g, tol, g.lattice().sup());
    auto sub_g = check_subexp_delta(g, sched, rel_tol);
    auto sub_fa = check_subexp_delta(fa, sched, rel_tol);
    out.reports.push_back({"s_delta_g", sub_g.doubling});
    out.reports.push_back({"s_delta_fa", sub_fa.doubling});
    double target = a * lambda / (1.0 - lambda);
    out.reports.push_back(
        {"ratio_fa_g", check_asymptotic_ratio(IntervalSource(fa), IntervalSource(g), target,
                                              sched, rel_tol)});
    out.distributions.emplace_back("fa", fa);
    return out;
}

namespace detail {

// Step laws for the ruin battery.
inline GridDistribution walk_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "simple") {
        double p = jreq(j, "p_up");
        if (!(p > 0.0) || !(p < 1.0))
            fail(ErrorCode::invalid_argument, "config: simple walk needs p_up in (0,1)");
        return GridDistribution(Lattice(-2.0, 1.0, 3), {1.0 - p, 0.0, p}, 0.0, 0.0);
    }
    if (kind == "exp_up_unit_down") {
        // +Exp(rate) with probability p_up, -1 otherwise
        double p = jreq(j, "p_up");
        double rate = jreq(j, "rate");
        double h = jreq(j, "span");
        double top = jget(j, "top", 40.0);
        auto up_cells = static_cast<std::size_t>(std::llround(top / h));
        auto down_cells = static_cast<std::size_t>(std::llround(1.0 / h));
        Lattice lat(-1.0 - h, h, up_cells + down_cells + 1);
        std::vector<double> mass(lat.len(), 0.0);
        mass[0] = 1.0 - p;  // atom at -1
        for (std::size_t k = down_cells + 1; k < lat.len(); ++k) {
            double a = lat.left_edge(static_cast<std::ptrdiff_t>(k));
            double b = lat.right_edge(static_cast<std::ptrdiff_t>(k));
            mass[k] = p * (std::exp(-rate * std::max(a, 0.0)) - std::exp(-rate * b));
        }
        double rx = p * std::exp(-rate * top);
        return GridDistribution(lat, std::move(mass), 0.0, rx);
    }
    fail(ErrorCode::invalid_argument, "config: unknown walk kind '" + kind + "'");
}

}  // namespace detail

// Random-walk supremum battery: ladder pipeline, tail equivalences, optional
// Monte Carlo cross-check.
inline ExperimentOutput run_ruin(const json& cfg, const CliOverrides& ov, std::uint64_t seed) {
    ExperimentOutput out;
    auto g = detail::walk_from_json(cfg.at("walk"));
    auto sched = schedule_from_json(cfg.at("schedule"), ov);
    double rel_tol = detail::jget(cfg, "rel_tol", 0.05);
    LadderOptions opt;
    opt.n_max = static_cast<long long>(detail::jget(cfg, "n_max", 400));
    opt.tol = detail::jget(cfg, "series_tol", 1e-8);
    opt.max_height = detail::jget(cfg, "max_height", 0.0);
    auto ld = ladder_decompose(g, opt);
    auto pi = supremum_distribution(ld, opt.tol);

    // normalized ladder measure as a distribution for the S_Delta check
    std::vector<double> nu_hat = ld.nu.mass();
    for (double& v : nu_hat) v /= ld.B;
    GridDistribution nu_dist(ld.nu.lattice(), std::move(nu_hat), 0.0,
                             std::max(0.0, 1.0 - ld.nu.total() / ld.B));
    auto sub_nu = check_subexp_delta(nu_dist, sched, rel_tol);
    out.reports.push_back({"s_delta_nu", sub_nu.doubling});
    out.reports.push_back(
        {"ratio_pi_nu", check_asymptotic_ratio(IntervalSource(pi), IntervalSource(ld.nu), 1.0,
                                               sched, rel_tol)});
    double target = ld.lambda / (1.0 - ld.lambda);
    out.reports.push_back(
        {"ratio_pi_g0", check_asymptotic_ratio(IntervalSource(pi), IntervalSource(ld.g0),
                                               target, sched, rel_tol)});

    auto paths = static_cast<std::size_t>(detail::jget(cfg, "mc_paths", 0));
    if (paths > 0) {
        double margin = detail::jget(cfg, "drift_margin", 1.0);
        double h = g.lattice().span();
        auto cells = static_cast<std::size_t>(
            std::llround((sched.x_points.back() + sched.window.c) / h)) + 1;
        Lattice target_lat(-h, h, cells + 1);
        auto mc = mc_supremum(GridStepSampler(g), paths, margin, seed, target_lat);
        DiagnosticReport agree;
        agree.check = "mc_agreement";
        agree.columns = {0.0};
        agree.target = 1.0;
        int beyond3 = 0;
        bool any_beyond4 = false;
        double worst_z = 0.0;
        for (double x : sched.x_points) {
            double grid_tail = tail_prob(pi, x);
            double mc_tail = tail_prob(mc.empirical, x);
            double se = std::sqrt(std::max(grid_tail * (1.0 - grid_tail), 1e-300) /
                                  static_cast<double>(paths));
            double z = (mc_tail - grid_tail) / se;
            worst_z = std::max(worst_z, std::abs(z));
            if (std::abs(z) > 3.0) ++beyond3;
            if (std::abs(z) > 4.0) any_beyond4 = true;
            agree.probes.push_back(x);
            agree.ratios.push_back({grid_tail > 0.0 ? mc_tail / grid_tail : 0.0});
        }
        agree.certificate = worst_z;
        agree.limit_estimate = agree.ratios.empty() ? 0.0 : agree.ratios.back()[0];
        agree.verdict = (!any_beyond4 && beyond3 <= 1) ? Verdict::pass : Verdict::fail;
        agree.trend = Trend::inconclusive;
        out.reports.push_back({"mc_agreement", agree});
        out.distributions.emplace_back("mc", mc.empirical);
    }
    out.distributions.emplace_back("pi", pi);
    out.distributions.emplace_back("g0", ld.g0);
    return out;
}

// Randomly stopped sums: ratio -> E[tau].
inline ExperimentOutput run_stopped_sum(const json& cfg, const CliOverrides& ov) {
    ExperimentOutput out;
    auto f = instantiate(family_from_json(cfg.at("family")));
    auto sched = schedule_from_json(cfg.at("schedule"), ov);
    double rel_tol = detail::jget(cfg, "rel_tol", 0.05);
    std::vector<double> tau;
    for (const auto& v : cfg.at("tau_pmf")) tau.push_back(v.get<double>());
    auto sub_f = check_subexp_delta(f, sched, rel_tol);
    out.reports.push_back({"s_delta_f", sub_f.doubling});
    out.reports.push_back({"ratio_stopped", stopped_sum_ratio_check(f, tau, sched, rel_tol)});
    return out;
}

// Kesten certificate battery.
inline ExperimentOutput run_kesten(const json& cfg, const CliOverrides& ov) {
    ExperimentOutput out;
    auto f = instantiate(family_from_json(cfg.at("family")));
    auto sched = schedule_from_json(cfg.at("schedule"), ov);
    double eps = detail::jget(cfg, "eps", 0.5);
    auto n_max = static_cast<long long>(detail::jget(cfg, "n_max", 20));
    out.reports.push_back({"kesten", kesten_certificate(f, sched, eps, n_max)});
    return out;
}

inline ExperimentOutput run_config(const json& cfg, const CliOverrides& ov,
                                   std::uint64_t seed) {
    if (!cfg.contains("experiment") || !cfg.at("experiment").is_string())
        fail(ErrorCode::invalid_argument, "config: missing string field 'experiment'");
    std::string which = cfg.at("experiment").get<std::string>();
    if (which == "diagnose") return run_diagnose(cfg, ov);
    if (which == "cp_theorem") return run_cp_theorem(cfg, ov);
    if (which == "id_theorem") return run_id_theorem(cfg, ov);
    if (which == "local_theorem") return run_local_theorem(cfg, ov);
    if (which == "nb_theorem") return run_nb_theorem(cfg, ov);
    if (which == "ruin") return run_ruin(cfg, ov, seed);
    if (which == "stopped_sum") return run_stopped_sum(cfg, ov);
    if (which == "kesten") return run_kesten(cfg, ov);
    fail(ErrorCode::invalid_argument, "config: unknown experiment '" + which + "'");
}

// Full run: parse, execute, write outputs. Returns the process exit code
// (0 all pass, 2 any inconclusive, 1 any fail).
inline int run_experiment_file(const std::string& config_path, const CliOverrides& ov) {
    std::ifstream is(config_path);
    if (!is) {
        std::fprintf(stderr, "tailgrid: cannot open config '%s'\n", config_path.c_str());
        return 64;
    }
    json cfg;
    try {
        cfg = json::parse(is, nullptr, true, true);  // allow comments
    } catch (const json::exception& e) {
        std::fprintf(stderr, "tailgrid: config parse error in '%s': %s\n", config_path.c_str(),
                     e.what());
        return 64;
    }

    std::uint64_t seed = 42;
    std::string out_dir = "tailgrid_out";
    ExperimentOutput result;
    try {
        if (cfg.contains("seed")) seed = cfg.at("seed").get<std::uint64_t>();
        if (ov.seed) seed = *ov.seed;
        if (cfg.contains("output_dir")) out_dir = cfg.at("output_dir").get<std::string>();
        if (ov.output_dir) out_dir = *ov.output_dir;
        result = run_config(cfg, ov, seed);
    } catch (const GridError& e) {
        if (e.code() == ErrorCode::invalid_argument || e.code() == ErrorCode::invalid_weights) {
            std::fprintf(stderr, "tailgrid: %s\n", e.what());
            return 64;
        }
        std::fprintf(stderr, "tailgrid: numeric failure: %s\n", e.what());
        return 70;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "tailgrid: config error: %s\n", e.what());
        return 64;
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        std::fprintf(stderr, "tailgrid: cannot create output dir '%s'\n", out_dir.c_str());
        return 64;
    }
    std::ofstream summary(out_dir + "/summary.csv");
    summary << kSummaryHeader << "\n";
    bool any_fail = false, any_open = false;
    for (const auto& nr : result.reports) {
        write_summary_row(summary, nr.name, nr.report);
        std::ofstream rep(out_dir + "/report_" + nr.name + ".csv");
        write_report_csv(rep, nr.report);
        any_fail = any_fail || nr.report.verdict == Verdict::fail;
        any_open = any_open || nr.report.verdict == Verdict::inconclusive;
        if (!ov.quiet)
            std::printf("%-24s %-12s limit=%.6g\n", nr.name.c_str(),
                        to_string(nr.report.verdict), nr.report.limit_estimate);
    }
    for (const auto& [name, dist] : result.distributions)
        write_csv_file(out_dir + "/dist_" + name + ".csv", dist);
    return any_fail ? 1 : (any_open ? 2 : 0);
}

}  // namespace tailgrid
