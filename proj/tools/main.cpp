// tailgrid command line: batch experiment runner for lattice tail diagnostics.
//
//   tailgrid run <config.json> [--output DIR] [--seed N] [--probes N] [--quiet]
//   tailgrid selftest
//   tailgrid version
//
// Exit codes for `run`: 0 all checks pass, 2 some inconclusive, 1 some fail,
// 64 usage/config error, 70 runtime numeric failure.

#include <CLI11.hpp>

#include <cstdio>
#include <sstream>

#include "tailgrid/experiments.hpp"
#include "tailgrid/version.hpp"

namespace {

using namespace tailgrid;

int g_failures = 0;

void check(const char* name, bool ok) {
    std::printf("[%s] %s\n", ok ? "ok" : "FAIL", name);
    if (!ok) ++g_failures;
}

template <class Fn>
void check_throws(const char* name, ErrorCode expect, Fn&& fn) {
    try {
        fn();
        check(name, false);
    } catch (const GridError& e) {
        check(name, e.code() == expect);
    } catch (...) {
        check(name, false);
    }
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Fast battery of the definitional identities; every item is closed-form.
int selftest() {
    check("lattice boundaries", Lattice(0.0, 0.5, 4).sup() == 2.0);
    check_throws("lattice rejects nonpositive span", ErrorCode::invalid_argument,
                 [] { Lattice(0.0, -1.0, 4); });

    auto d0 = delta_at(0.0, 0.5);
    check("atom inside window", interval_prob(d0, -0.5, DeltaWindow(1.0)) == 1.0);
    check("tail is right-closed at the atom", tail_prob(d0, 0.0) == 0.0);
    check("tail below the atom", tail_prob(d0, -1.0) == 1.0);
    check_throws("misaligned window rejected", ErrorCode::misaligned_window,
                 [&] { interval_prob(d0, -0.3, DeltaWindow(1.0)); });

    auto dsum = convolve(delta_at(2.0, 0.5), delta_at(3.0, 0.5));
    check("delta convolution translates", dsum.lattice().position(0) == 5.0 &&
                                              dsum.mass()[0] == 1.0);
    auto d5 = n_fold(delta_at(1.0, 0.5), 5);
    check("five-fold delta_1 is delta_5", d5.lattice().position(0) == 5.0);
    check("zero-fold is delta_0", n_fold(d5, 0).lattice().position(0) == 0.0);
    check_throws("negative fold rejected", ErrorCode::invalid_argument,
                 [&] { n_fold(d5, -1); });

    Lattice pm(-2.0, 1.0, 3);
    GridDistribution pmmix(pm, {0.5, 0.0, 0.5}, 0.0, 0.0);
    auto cond = positive_conditional(pmmix);
    check("positive conditional of +-1 mixture", cond.mass()[2] == 1.0);
    auto trunc = positive_truncated(pmmix);
    check("positive truncation keeps the upper tail", tail_prob(trunc, 0.0) == 0.5);
    check_throws("conditional needs positive mass", ErrorCode::degenerate_support, [&] {
        positive_conditional(GridDistribution(pm, {1.0, 0.0, 0.0}, 0.0, 0.0));
    });

    auto bern = mix({0.5, 0.5}, {delta_at(0.0, 1.0), delta_at(1.0, 1.0)});
    check("mix builds a fair Bernoulli", bern.mass()[0] == 0.5 && bern.mass()[1] == 0.5);
    check_throws("mix rejects bad weights", ErrorCode::invalid_weights,
                 [&] { mix({0.5, 0.6}, {delta_at(0.0, 1.0), delta_at(1.0, 1.0)}); });

    auto d1 = delta_at(1.0, 1.0);
    auto tiny = compound_poisson(1e-8, d1, 1e-12);
    std::ptrdiff_t z = tiny.lattice().boundary_index(0.0) - 1;
    check("tiny-rate compound Poisson is nearly delta_0",
          tiny.mass()[static_cast<std::size_t>(z)] > 1.0 - 2e-8);
    check_throws("compound Poisson rejects lambda <= 0", ErrorCode::invalid_argument,
                 [&] { compound_poisson(0.0, d1, 1e-10); });
    check_throws("compound geometric rejects lambda >= 1", ErrorCode::invalid_argument,
                 [&] { compound_geometric(1.0, d1, 1e-10); });
    auto nb1 = compound_negative_binomial(1.0, 0.4, d1, 1e-12);
    auto geo = compound_geometric(0.4, d1, 1e-12);
    bool same = nb1.mass().size() == geo.mass().size();
    for (std::size_t k = 0; same && k < nb1.mass().size(); ++k)
        same = nb1.mass()[k] == geo.mass()[k];
    check("negative binomial a=1 is the geometric path", same);

    auto geo_pmf = compound_geometric(0.5, d1, 1e-14);
    std::ptrdiff_t gz = geo_pmf.lattice().boundary_index(0.0) - 1;
    check("geometric pmf at 0", near(geo_pmf.mass()[static_cast<std::size_t>(gz)], 0.5, 1e-12));

    auto f = compound_poisson(1.0, d1, 1e-12);
    auto same_f = randomly_stopped_sum({0.0, 1.0}, f);
    check("stopping at tau = 1 returns F",
          near(tail_prob(same_f, 3.0), tail_prob(f, 3.0), 1e-15));
    auto stop0 = randomly_stopped_sum({1.0}, f);
    check("stopping at tau = 0 returns delta_0", tail_prob(stop0, 0.0) == 0.0);

    check_throws("inversion rejects lambda*Lambda1 >= log 2", ErrorCode::series_divergent, [&] {
        auto mu10 = strip_zero_atom(f, std::exp(-1.0));
        levy_inversion(mu10, 0.8, 1e-9);
    });

    Lattice ml(0.0, 0.5, 8);
    std::vector<double> atom2(8, 0.0);
    atom2[3] = 0.25;
    auto nu1 = normalized_tail_measure(GridMeasure(ml, atom2));
    check("normalized tail measure of an atom at 2", tail_prob(nu1, 1.5) == 1.0);
    check_throws("normalized tail needs mass above 1", ErrorCode::degenerate_measure, [&] {
        std::vector<double> below(8, 0.0);
        below[0] = 1.0;
        normalized_tail_measure(GridMeasure(ml, below));
    });
    check_throws("truncated cp needs mass above c1", ErrorCode::degenerate_measure, [&] {
        truncated_cp(GridMeasure(ml, atom2), 3.0, 1e-10);
    });

    check_throws("monotone certificate rejects an upward jump",
                 ErrorCode::not_s_self_decomposable, [] {
                     Lattice lat(0.0, 0.01, 600);
                     s_sd_levy_measure(
                         [](double x) { return std::pow(x, -2.0) + (x > 3.0 ? 1.0 : 0.0); },
                         [](double) { return 0.0; }, lat, 0.1, 0.1);
                 });

    FunctionSamples mono;
    for (int i = 0; i < 64; ++i) {
        double x = 4.0 + 0.5 * i;
        mono.emplace_back(x, std::pow(x, -2.0));
    }
    check("monotone samples are a.n.i.", check_ani(mono, 4.0, 0.05).verdict == Verdict::pass);
    auto ald = check_ald(mono, 4.0);
    check("monotone samples give K-hat = 1",
          ald.verdict == Verdict::pass && *ald.certificate == 1.0);
    check_throws("kesten rejects n_max = 1", ErrorCode::invalid_argument, [&] {
        auto sched = ProbeSchedule::geometric(1.0, 2.0, 8, {1.0}, 1.0);
        kesten_certificate(f, sched, 0.5, 1);
    });

    auto ld = ladder_decompose(delta_at(-1.0, 1.0), {});
    auto pi = supremum_distribution(ld, 1e-10);
    check("never-rising walk has supremum delta_0",
          ld.lambda == 0.0 && tail_prob(pi, 0.0) == 0.0);
    auto mc = mc_supremum(GridStepSampler(delta_at(-1.0, 1.0)), 2000, 1.0, 7,
                          Lattice(-1.0, 1.0, 8));
    check("degenerate walk MC piles at zero", mc.empirical.mass()[0] == 1.0);

    auto pt = instantiate(FamilySpec::point(3.0, Lattice(0.0, 0.5, 10)));
    check("point family builds delta_3", tail_prob(pt, 2.5) == 1.0 && tail_prob(pt, 3.0) == 0.0);
    check_throws("weibull shape >= 1 rejected", ErrorCode::invalid_argument,
                 [] { FamilySpec::weibull(1.2, 1.0, Lattice(0.0, 0.01, 100)); });

    std::stringstream ss;
    write_csv(ss, f);
    auto back = read_distribution_csv(ss);
    bool bit = back.lattice().origin() == f.lattice().origin();
    for (std::size_t k = 0; bit && k < f.mass().size(); ++k)
        bit = back.mass()[k] == f.mass()[k];
    check("distribution CSV round trip is bit exact", bit);

    std::printf("%s\n", g_failures == 0 ? "selftest: all checks passed"
                                        : "selftest: FAILURES present");
    return g_failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice distributions and heavy-tail diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    tailgrid::CliOverrides ov;
    std::string out_override;
    std::uint64_t seed_override = 0;
    std::size_t probes_override = 0;

    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "JSON experiment config")->required();
    auto* out_opt = run->add_option("--output", out_override, "override output directory");
    auto* seed_opt = run->add_option("--seed", seed_override, "override RNG seed");
    auto* probes_opt = run->add_option("--probes", probes_override, "override probe count");
    run->add_flag("--quiet", ov.quiet, "suppress per-check stdout lines");

    auto* self = app.add_subcommand("selftest", "run the built-in identity battery");
    auto* ver = app.add_subcommand("version", "print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help
        std::fprintf(stderr, "tailgrid: %s\n", e.what());
        return 64;
    }

    if (ver->parsed()) {
        std::printf("tailgrid %s\n", tailgrid::kVersion);
        return 0;
    }
    if (self->parsed()) return selftest();

    if (*out_opt) ov.output_dir = out_override;
    if (*seed_opt) ov.seed = seed_override;
    if (*probes_opt) ov.probes = probes_override;
    return tailgrid::run_experiment_file(config_path, ov);
}
