// accim: command-line driver for tower construction, a.c.c.i.m. solves, studies and Monte Carlo runs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "accim/analysis.hpp"
#include "accim/config.hpp"
#include "accim/errors.hpp"
#include "accim/montecarlo.hpp"
#include "accim/report_io.hpp"
#include "accim/ulam.hpp"

namespace fs = std::filesystem;
using namespace accim;

namespace {

struct Common {
    std::string config;
    std::string out;
    int workers = 1;
    long long seed = -1;
};

ExperimentConfig load(const Common& c)
{
    auto cfg = load_config(c.config);
    if (!c.out.empty())
        cfg.output = c.out;
    if (c.seed >= 0)
        cfg.seed = static_cast<std::uint64_t>(c.seed);
    cfg.solve.workers = c.workers;
    fs::create_directories(cfg.output);
    return cfg;
}

std::ofstream open_out(const ExperimentConfig& cfg, const std::string& name)
{
    std::ofstream f(fs::path(cfg.output) / name);
    if (!f)
        throw std::runtime_error("cannot write " + (fs::path(cfg.output) / name).string());
    return f;
}

void write_json(const ExperimentConfig& cfg, const std::string& name, const nlohmann::ordered_json& j)
{
    auto f = open_out(cfg, name);
    f << j.dump(2) << '\n';
}

int cmd_check(const Common& c)
{
    const auto cfg = load(c);
    const auto sys = cfg.system();
    const double delta = cfg.solve.delta ? *cfg.solve.delta : choose_delta(sys);
    const auto tower = build_tower(sys, delta, cfg.solve.tower);
    const auto rep = compute_constants(tower, cfg.solve.conditions);
    const auto checks = check_hypotheses(rep, tower);
    write_check_table(std::cout, rep, checks);

    nlohmann::ordered_json j;
    j["map"] = cfg.require_map().name();
    j["constants"] = constants_json(rep);
    j["checks"] = checks_json(checks);
    auto levels = nlohmann::ordered_json::array();
    for (const auto& l : h1_levels(rep, tower))
        levels.push_back({{"level", l.level}, {"measured", l.measured}, {"bound", l.bound}});
    j["h1_levels"] = levels;
    j["cells"] = tower.cells().size();
    j["top_level"] = tower.top_level();
    j["tail_mass"] = tower.tail_mass();
    const auto tr = check_transitivity(sys, cfg.solve.transitivity_horizon);
    j["transitivity"] = {{"determined", tr.determined}, {"n_j", tr.n_j}};
    write_json(cfg, "report.json", j);
    return 0;
}

int cmd_solve(const Common& c)
{
    const auto cfg = load(c);
    const auto sys = cfg.system();
    const auto sol = solve(sys, cfg.solve);
    const auto bounds = density_bounds(sol.result, sol.constants, *sol.tower, cfg.solve.transitivity_horizon);
    {
        auto f = open_out(cfg, "density.csv");
        write_density_csv(f, sol.fixed.phi);
    }
    {
        auto f = open_out(cfg, "psi.csv");
        write_psi_csv(f, sol.result);
    }
    nlohmann::ordered_json j;
    j["map"] = cfg.require_map().name();
    j["lambda"] = sol.result.lambda;
    j["escape_rate"] = sol.result.escape_rate;
    j["iterations"] = sol.fixed.iterations;
    j["residual"] = sol.fixed.residual;
    j["converged"] = sol.fixed.converged;
    j["lambda_interval"] = sol.result.lambda_interval;
    j["conditional_invariance_residual"] = sol.result.residual;
    j["sup_psi"] = sol.result.sup_psi;
    j["inf_psi"] = sol.result.inf_psi;
    if (sol.result.variation)
        j["variation"] = *sol.result.variation;
    j["cells"] = sol.tower->cells().size();
    j["tail_mass"] = sol.tower->tail_mass();
    j["bounds"] = bounds_json(bounds);
    j["checks"] = checks_json(sol.checks);
    j["constants"] = constants_json(sol.constants);
    if (cfg.ulam_bins > 0) {
        const auto u = ulam_oracle(sys, cfg.ulam_bins);
        j["ulam"] = {{"bins", cfg.ulam_bins},
                     {"lambda", u.lambda},
                     {"l1_vs_tower", l1_distance(*sol.result.density, u.as_density(sys), cfg.solve.grid)}};
    }
    write_json(cfg, "summary.json", j);
    std::printf("lambda = %.15g\nescape_rate = %.15g\nresidual = %.3e\n", sol.result.lambda, sol.result.escape_rate,
                sol.result.residual);
    return 0;
}

HoleFamily family_of(const ExperimentConfig& cfg)
{
    if (!cfg.family)
        throw ConfigError("this command needs a hole_family section");
    return cfg.family->build();
}

int cmd_shrink(const Common& c)
{
    const auto cfg = load(c);
    auto fam = family_of(cfg);
    const auto rows = shrink_study(cfg.require_map(), fam, weak_battery(), cfg.solve);
    auto f = open_out(cfg, "shrink.csv");
    write_shrink_csv(f, rows);
    for (const auto& r : rows)
        std::printf("s = %-10g lambda = %.12f  l1 = %.6e\n", r.s, r.lambda, r.l1_dist);
    return 0;
}

int cmd_lipschitz(const Common& c)
{
    const auto cfg = load(c);
    auto fam = family_of(cfg);
    const auto rows = lipschitz_study(cfg.require_map(), fam, cfg.solve);
    auto f = open_out(cfg, "lipschitz.csv");
    write_lipschitz_csv(f, rows);
    for (const auto& r : rows)
        std::printf("mH = %-10g 1-lambda = %.6e  bound = %.6e  %s\n", r.mH, r.one_minus_lambda, r.bound,
                    r.pass ? "PASS" : "FAIL");
    return 0;
}

int cmd_mc(const Common& c)
{
    const auto cfg = load(c);
    const auto sys = cfg.system();
    MonteCarloOptions mo;
    mo.particles = cfg.mc.particles;
    mo.seed = cfg.seed;
    mo.workers = c.workers;
    mo.initial = cfg.mc.initial == "ramp" ? InitialDistribution::ramp() : InitialDistribution::uniform();
    const auto rec = simulate_survival(sys, cfg.mc.steps, mo);
    {
        auto f = open_out(cfg, "survival.csv");
        write_survival_csv(f, rec);
    }
    nlohmann::ordered_json j;
    j["particles"] = cfg.mc.particles;
    j["seed"] = cfg.seed;
    j["initial"] = cfg.mc.initial;
    try {
        const auto fit = fit_escape_ratio(rec, cfg.mc.window_begin, cfg.mc.window_end);
        j["lambda_fit"] = fit.lambda;
        j["sigma"] = fit.sigma;
        std::printf("lambda_fit = %.10f +- %.2e\n", fit.lambda, fit.sigma);
    } catch (const ResolutionError& e) {
        j["lambda_fit"] = nullptr;
        j["fit_error"] = e.what();
    }
    try {
        const auto h = empirical_conditional_density(sys, cfg.mc.hist_step, cfg.mc.bins, mo);
        auto f = open_out(cfg, "histogram.csv");
        write_histogram_csv(f, h);
        j["histogram_survivors"] = h.survivors;
    } catch (const ResolutionError& e) {
        j["histogram_error"] = e.what();
    }
    write_json(cfg, "mc_summary.json", j);
    return 0;
}

int cmd_tower_dump(const Common& c)
{
    const auto cfg = load(c);
    const auto sys = cfg.system();
    const double delta = cfg.solve.delta ? *cfg.solve.delta : choose_delta(sys);
    const auto tower = build_tower(sys, delta, cfg.solve.tower);
    write_json(cfg, "tower.json", tower_json(tower));
    std::printf("%zu cells, %zu tower holes, top level %d\n", tower.cells().size(), tower.holes().size(),
                tower.top_level());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Towers, conditionally invariant measures and escape rates for expanding maps with holes"};
    app.require_subcommand(1);
    Common common;
    std::function<int(const Common&)> action;

    auto add = [&](const std::string& name, const std::string& help, int (*fn)(const Common&)) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", common.config, "YAML experiment config")->required();
        sub->add_option("-o,--out", common.out, "output directory (overrides the config)");
        sub->add_option("-w,--workers", common.workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("-s,--seed", common.seed, "RNG seed (overrides the config)")->check(CLI::NonNegativeNumber);
        sub->callback([&action, fn] { action = fn; });
    };
    add("check", "build the tower and report hypotheses and constants", cmd_check);
    add("solve", "compute the conditionally invariant density and eigenvalue", cmd_solve);
    add("shrink", "hole-shrinking convergence study", cmd_shrink);
    add("lipschitz", "1 - lambda against hole measure", cmd_lipschitz);
    add("mc", "Monte Carlo survival and conditional histogram", cmd_mc);
    add("tower-dump", "write the tower structure as JSON", cmd_tower_dump);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        return action(common);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const FamilyError& e) {
        std::cerr << "invalid hole family: " << e.what() << '\n';
        return 4;
    } catch (const DegenerateSystemError& e) {
        std::cerr << "degenerate system: " << e.what() << '\n';
        return 3;
    } catch (const TotalEscapeError& e) {
        std::cerr << "total escape: " << e.what() << '\n';
        return 3;
    } catch (const HypothesisFailure& e) {
        std::cerr << "no admissible construction: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
