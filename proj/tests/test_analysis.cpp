#include <doctest.h>

#include <cmath>
#include <random>

#include "accim/analysis.hpp"
#include "accim/errors.hpp"
#include "accim/presets.hpp"
#include "accim/ulam.hpp"
#include "oracles.hpp"

using namespace accim;

namespace {

const Hole kMarkov({{1.0 / 3.0, 2.0 / 3.0}});
const Hole kSmall({{0.5, 0.502}});

const BoundCheck& bound(const std::vector<BoundCheck>& v, const std::string& name)
{
    for (const auto& b : v)
        if (b.name == name)
            return b;
    throw std::runtime_error("missing bound " + name);
}

} // namespace

TEST_CASE("Markov hole projects to a flat density")
{
    const OpenSystem s(preset_map("tripling"), kMarkov);
    const auto sol = solve(s);
    const auto& r = sol.result;
    CHECK(r.lambda == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.escape_rate == doctest::Approx(std::log(1.5)).epsilon(1e-12));
    for (std::size_t i = 0; i < r.psi.size(); ++i) {
        const double mid = 0.5 * (r.edges[i] + r.edges[i + 1]);
        if (mid < 1.0 / 3.0 - 1e-3 || mid > 2.0 / 3.0 + 1e-3)
            CHECK(r.psi[i] == doctest::Approx(1.5).epsilon(1e-10));
        else if (mid > 1.0 / 3.0 + 1e-3 && mid < 2.0 / 3.0 - 1e-3)
            CHECK(r.psi[i] == 0.0);
    }
    CHECK(r.sup_psi == doctest::Approx(1.5));
    CHECK(r.inf_psi == doctest::Approx(1.5));
    CHECK(r.residual <= 1e-8);
    CHECK(r.density->mass(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

    const auto b = density_bounds(r, sol.constants, *sol.tower);
    CHECK(bound(b, "sup_psi").pass);
    CHECK(bound(b, "inf_psi").pass);
    CHECK(bound(b, "variation").pass);
    CHECK(bound(b, "lambda_ge_1_minus_qM").pass);
    // the hypotheses fail for this hole, and so does the eigenvalue lower bound
    CHECK_FALSE(bound(b, "lambda_ge_exp_minus_xi").pass);
}

TEST_CASE("closed tripling projects to Lebesgue")
{
    const auto sol = srb_closed(preset_map("tripling"));
    const auto& r = sol.result;
    CHECK(r.lambda == doctest::Approx(1.0).epsilon(1e-14));
    for (double v : r.psi)
        CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.inf_psi == doctest::Approx(1.0));
    CHECK(r.residual <= 1e-8);
    REQUIRE(r.variation);
    CHECK(*r.variation <= 1e-9);
    for (const auto& b : density_bounds(r, sol.constants, *sol.tower)) {
        CAPTURE(b.name);
        CHECK(b.pass);
    }
}

TEST_CASE("small hole: bounds, overlap and consistency")
{
    const OpenSystem s(preset_map("tripling"), kSmall);
    const auto sol = solve(s);
    const auto& r = sol.result;
    CHECK(r.density->mass(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.inf_psi > 0.0);
    CHECK(r.residual <= 1e-6);
    CHECK(std::abs(r.lambda_interval - r.lambda) <= 1e-6);
    CHECK(std::abs(interval_lambda(s, *r.density) - r.lambda) <= 1e-6);
    for (const auto& b : density_bounds(r, sol.constants, *sol.tower)) {
        CAPTURE(b.name);
        CHECK(b.pass);
    }
    for (int l = 1; l <= sol.tower->top_level(); ++l) {
        CAPTURE(l);
        CHECK(r.density->max_overlap(l) <= (1 << std::min(l - 1, 30)));
    }

    // survivor-measure ratios settle on lambda
    const auto m = oracle::tripling_survivor_measures(0.5, 0.502, 12);
    CHECK(std::abs(m[12] / m[11] - r.lambda) <= 1e-3);

    const auto u = ulam_oracle(s, 3000);
    CHECK(l1_distance(*r.density, u.as_density(s)) <= 1e-2);
}

TEST_CASE("negative control: a random density is not conditionally invariant")
{
    const OpenSystem s(preset_map("tripling"), kSmall);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.5, 1.5);
    std::vector<double> d(64);
    for (auto& x : d)
        x = U(rng);
    HistogramDensity h(uniform_edges(64), d, s.surviving_set());
    const double m = h.mass(0.0, 1.0);
    for (auto& x : d)
        x /= m;
    HistogramDensity hn(uniform_edges(64), d, s.surviving_set());
    const double lam = interval_lambda(s, hn);
    CHECK(conditional_invariance_residual(s, hn, lam) > 1e-4);
}

TEST_CASE("perturbed tripling: SRB density and small-hole bounds")
{
    const auto map = preset_map("perturbed_tripling");
    const auto srb = srb_closed(map);
    CHECK(srb.result.lambda == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(srb.result.residual <= 1e-6);
    CHECK(srb.result.density->mass(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    const OpenSystem closed(map, Hole());
    const auto u = ulam_oracle(closed, 3000);
    CHECK(std::abs(u.lambda - 1.0) <= 1e-3);
    CHECK(l1_distance(*srb.result.density, u.as_density(closed)) <= 1e-3);

    const OpenSystem open(map, kSmall);
    const auto sol = solve(open);
    CHECK(sol.result.residual <= 1e-6);
    for (const auto& b : density_bounds(sol.result, sol.constants, *sol.tower)) {
        CAPTURE(b.name);
        CHECK(b.pass);
    }
}

TEST_CASE("hole families")
{
    auto c = centered_family(0.5, {0.01, 0.02, 0.0});
    const auto rep = validate_family(preset_map("tripling"), c);
    CHECK(c.sizes == std::vector<double>{0.02, 0.01, 0.0});
    CHECK(c.holes[2].empty());
    CHECK(c.holes[0].intervals()[0].lo == doctest::Approx(0.49));
    CHECK(rep.mixing_ok);

    auto r = right_family(0.5, {0.001});
    CHECK(r.holes[0].intervals()[0].hi == doctest::Approx(0.501));

    CHECK_THROWS_AS(right_family(0.9, {0.2}), FamilyError);
    HoleFamily bad{"explicit", {0.1, 0.05}, {Hole({{0.1, 0.2}}), Hole({{0.3, 0.35}})}};
    CHECK_THROWS_AS(validate_family(preset_map("tripling"), bad), FamilyError);
    HoleFamily too_big{"explicit", {0.01}, {Hole({{0.1, 0.2}})}};
    CHECK_THROWS_AS(validate_family(preset_map("tripling"), too_big), FamilyError);
}

TEST_CASE("Lipschitz study")
{
    const auto rows = lipschitz_study(preset_map("tripling"), right_family(0.5, {0.001, 0.002, 0.004, 0.0}));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].s == 0.004);
    for (const auto& row : rows) {
        CAPTURE(row.s);
        CHECK(row.pass);
        CHECK(row.one_minus_lambda <= row.bound + 1e-10);
    }
    CHECK(std::abs(rows[3].one_minus_lambda) <= 1e-12);

    HoleFamily markov{"explicit", {1.0 / 3.0}, {kMarkov}};
    const auto m = lipschitz_study(preset_map("tripling"), markov);
    CHECK(m[0].one_minus_lambda == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK_FALSE(m[0].a1_pass);
}

TEST_CASE("weak battery integrals")
{
    const auto srb = srb_closed(preset_map("tripling"));
    const auto& nu = *srb.result.density;
    const auto& battery = weak_battery();
    REQUIRE(battery.size() == 9);
    CHECK(integrate_test_function(nu, battery[0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(integrate_test_function(nu, battery[1]) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(integrate_test_function(nu, battery[2]) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    for (std::size_t i = 3; i < battery.size(); ++i)
        CHECK(integrate_test_function(nu, battery[i]) == doctest::Approx(battery[i].hi - battery[i].lo).epsilon(1e-9));
}

TEST_CASE("shrink study converges")
{
    const auto rows = shrink_study(preset_map("tripling"), centered_family(0.5, {0.0, 0.02, 0.005}));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].s == 0.02);
    CHECK(rows[1].l1_dist < rows[0].l1_dist);
    CHECK(rows[1].lambda > rows[0].lambda);
    for (std::size_t k = 0; k < rows[0].weak_dists.size(); ++k)
        CHECK(rows[1].weak_dists[k] <= rows[0].weak_dists[k] + 1e-9);
    CHECK(rows[2].l1_dist <= 1e-9);
    for (double w : rows[2].weak_dists)
        CHECK(w <= 1e-9);
    CHECK(rows[2].lambda == doctest::Approx(1.0));
}
