#include <doctest.h>

#include <cmath>

#include "accim/conditions.hpp"
#include "accim/presets.hpp"

using namespace accim;

namespace {

const HypothesisCheck& find(const std::vector<HypothesisCheck>& v, const std::string& name)
{
    for (const auto& h : v)
        if (h.name == name)
            return h;
    throw std::runtime_error("missing check " + name);
}

} // namespace

TEST_CASE("Markov hole constants")
{
    const OpenSystem s(preset_map("tripling"), Hole({{1.0 / 3.0, 2.0 / 3.0}}));
    const auto t = build_tower(s, choose_delta(s));
    const auto r = compute_constants(t);
    CHECK(r.mu == 3.0);
    CHECK(r.C_tilde == 0.0);
    CHECK(r.xi == doctest::Approx(0.5 * std::log(1.5)).epsilon(1e-14));
    CHECK(r.xi == doctest::Approx(0.2027).epsilon(1e-3));
    CHECK(r.gamma == doctest::Approx(3.0));
    CHECK(r.a == doctest::Approx(1.0 / std::sqrt(1.5)));
    CHECK(r.M == doctest::Approx(1.0 / (1.0 - 1.0 / std::sqrt(1.5))));
    CHECK(r.M == doctest::Approx(5.44949).epsilon(1e-5));
    // all the lost mass sits at level 1
    CHECK(r.q == doctest::Approx(2.0 / 3.0));

    const auto checks = check_hypotheses(r, t);
    REQUIRE(checks.size() == 6);
    CHECK(checks[0].name == "H1");
    CHECK(checks[4].name == "A1");
    CHECK_FALSE(find(checks, "A1").pass);
    CHECK_FALSE(find(checks, "H3'").pass);
    CHECK_FALSE(find(checks, "hole_bound").pass);
    CHECK(find(checks, "H1").pass);
}

TEST_CASE("small hole constants and level checks")
{
    const OpenSystem s(preset_map("tripling"), Hole({{0.5, 0.502}}));
    const auto t = build_tower(s, choose_delta(s));
    const auto r = compute_constants(t);
    const double d = 2.0 / 3.0 - 0.502;
    CHECK(r.delta == doctest::Approx(d));
    CHECK(r.N == 6);
    CHECK(r.A == doctest::Approx(6.0 / d));
    CHECK(r.theta == doctest::Approx(2.0 / 3.0));

    for (const auto& lv : h1_levels(r, t)) {
        CAPTURE(lv.level);
        CHECK(lv.measured <= lv.bound);
    }

    // hole condition threshold evaluated directly at delta = d
    const double s2 = std::sqrt(2.0 / 3.0);
    const double expected = (1 - s2) * (1 - s2) * 3.0 * d * d * (1 - s2);
    CHECK(r.a1_threshold == doctest::Approx(expected).epsilon(1e-12));
    CHECK(r.a1_threshold == doctest::Approx(5.02e-4).epsilon(1e-2));
    const auto checks = check_hypotheses(r, t);
    const auto& a1 = find(checks, "A1");
    CHECK(a1.value == doctest::Approx(0.002));
    CHECK_FALSE(a1.pass);
    CHECK(a1.margin < 0.0);

    // the escape-weighted hole mass is below its analytic bound, and H3' holds
    CHECK(r.q > 0.0);
    CHECK(r.q <= r.q_bound);
    CHECK(find(checks, "H3'").pass);
    CHECK(find(checks, "H1").pass);
    CHECK(find(checks, "hole_bound").pass);
    CHECK(r.lambda_lower == doctest::Approx(1.0 - r.q * r.M));
}

TEST_CASE("xi override and nonlinear constants")
{
    const OpenSystem s(preset_map("perturbed_tripling"), Hole({{0.5, 0.502}}));
    const auto t = build_tower(s, choose_delta(s));
    const auto r = compute_constants(t);
    CHECK(r.C_tilde > 0.0);
    CHECK(r.C == doctest::Approx(r.C_tilde * 2.0 * r.delta));
    CHECK(r.b == doctest::Approx(1.0 + r.C));
    CHECK(r.valid);
    CHECK(r.gamma >= r.gamma_generic * (1 - 1e-9));

    ConditionOptions opt;
    opt.xi = 0.05;
    const auto r2 = compute_constants(t, opt);
    CHECK(r2.xi == 0.05);
    CHECK(r2.a >= std::exp(-0.05) * (1 - 1e-15));
    CHECK(r2.M > r.M);
    CHECK(r2.q < r.q);
}

TEST_CASE("Hoelder map uses the nonlinearity term")
{
    const OpenSystem s(preset_map("holder_half"), Hole());
    const auto t = build_tower(s, choose_delta(s));
    const auto r = compute_constants(t);
    CHECK(r.alpha == 0.5);
    CHECK(r.xi <= 0.5 * std::log(r.mu));
    CHECK(r.a >= (1.0 + r.C) / std::pow(r.gamma, 0.5) * (1 - 1e-14));
    const auto checks = check_hypotheses(r, t);
    CHECK(find(checks, "H2").pass);
    CHECK(find(checks, "H2").note.empty());
    // closed system: nothing lost, the hole condition holds trivially
    CHECK(r.q == 0.0);
    CHECK(find(checks, "A1").pass);
}

TEST_CASE("coverage and transitivity")
{
    const auto t = preset_map("tripling");
    {
        const OpenSystem s(t, Hole({{1.0 / 3.0, 2.0 / 3.0}}));
        CHECK(coverage_time(s, {0.0, 1.0 / 3.0}, 10) == 1);
        CHECK(coverage_time(s, {0.0, 1.0 / 3.0}, 10, CoverTarget::Whole) == 1);
        CHECK(coverage_time(s, {0.0, 0.01}, 10) == 5);
        const auto tr = check_transitivity(s, 10);
        CHECK(tr.determined);
        CHECK(tr.n_j == std::vector<int>{1, 1});
    }
    {
        const OpenSystem s(t, Hole({{0.5, 0.502}}));
        const auto tr = check_transitivity(s, 64);
        CHECK(tr.determined);
        for (int n : tr.n_j) {
            CHECK(n >= 1);
            CHECK(n <= 3);
        }
        CHECK_FALSE(coverage_time(s, {0.0, 1e-6}, 3).has_value());
    }
}
