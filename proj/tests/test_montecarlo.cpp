#include <doctest.h>

#include <cmath>

#include "accim/analysis.hpp"
#include "accim/errors.hpp"
#include "accim/montecarlo.hpp"
#include "accim/presets.hpp"

using namespace accim;

namespace {

const Hole kMarkov({{1.0 / 3.0, 2.0 / 3.0}});
const Hole kSmall({{0.5, 0.502}});

MonteCarloOptions opts(long long particles, int workers = 1, std::uint64_t seed = 1)
{
    MonteCarloOptions o;
    o.particles = particles;
    o.workers = workers;
    o.seed = seed;
    return o;
}

} // namespace

TEST_CASE("counter RNG is a pure function of its inputs")
{
    CHECK(counter_hash(1, 2, 3) == counter_hash(1, 2, 3));
    CHECK(counter_hash(1, 2, 3) != counter_hash(1, 2, 4));
    CHECK(counter_hash(1, 2, 3) != counter_hash(2, 2, 3));
    double mean = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = counter_uniform(7, i, 0);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        mean += u;
    }
    CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("records are identical for any worker count")
{
    const OpenSystem s(preset_map("perturbed_tripling"), kSmall);
    const auto a = simulate_survival(s, 30, opts(20000, 1));
    const auto b = simulate_survival(s, 30, opts(20000, 4));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].survivors == b[i].survivors);
        CHECK(a[i].p_n == b[i].p_n);
    }
    const auto c = simulate_survival(s, 30, opts(20000, 1, 2));
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        differs = differs || a[i].survivors != c[i].survivors;
    CHECK(differs);
}

TEST_CASE("closed map keeps every particle")
{
    const OpenSystem s(preset_map("tripling"), Hole());
    for (const auto& r : simulate_survival(s, 25, opts(5000)))
        CHECK(r.p_n == 1.0);
}

TEST_CASE("Markov survival probabilities")
{
    const OpenSystem s(preset_map("tripling"), kMarkov);
    const auto rec = simulate_survival(s, 12, opts(1000000, 4));
    CHECK(rec[0].p_n == 1.0);
    for (std::size_t i = 1; i < rec.size(); ++i)
        CHECK(rec[i].p_n <= rec[i - 1].p_n);
    const double exact = std::pow(2.0 / 3.0, 5);
    CHECK(exact == doctest::Approx(0.13169).epsilon(1e-4));
    CHECK(std::abs(rec[5].p_n - exact) <= 4 * std::sqrt(exact * (1 - exact) / 1e6));
}

TEST_CASE("escape-ratio fit matches the tower eigenvalue")
{
    const OpenSystem s(preset_map("tripling"), kSmall);
    const double lambda = solve(s).result.lambda;
    const auto rec = simulate_survival(s, 16, opts(1000000, 4, 3));
    const auto fit = fit_escape_ratio(rec, 5, 15);
    CHECK(fit.sigma > 0.0);
    CHECK(std::abs(fit.lambda - lambda) <= 4 * fit.sigma);
    CHECK_THROWS_AS(fit_escape_ratio(rec, 40, 50), ResolutionError);
}

TEST_CASE("Markov conditional histogram")
{
    const OpenSystem s(preset_map("tripling"), kMarkov);
    const auto h = empirical_conditional_density(s, 10, 30, opts(1000000, 4));
    int failures = 0;
    for (std::size_t i = 0; i < h.density.size(); ++i) {
        const double mid = 0.5 * (h.edges[i] + h.edges[i + 1]);
        const double exact = (mid > 1.0 / 3.0 && mid < 2.0 / 3.0) ? 0.0 : 1.5;
        const double sigma = std::max(h.std_error[i], 1e-12);
        failures += std::abs(h.density[i] - exact) > 4 * sigma;
    }
    CHECK(failures == 0);
}

TEST_CASE("uniform start at n = 0 gives a flat histogram")
{
    const OpenSystem s(preset_map("tripling"), Hole());
    const auto h = empirical_conditional_density(s, 0, 20, opts(200000));
    for (std::size_t i = 0; i < h.density.size(); ++i)
        CHECK(std::abs(h.density[i] - 1.0) <= 4 * h.std_error[i]);
}

TEST_CASE("conditional distributions forget the initial density")
{
    const OpenSystem s(preset_map("tripling"), kSmall);
    auto uni = opts(400000, 4, 5);
    auto ramp = opts(400000, 4, 6);
    ramp.initial = InitialDistribution::ramp();
    const auto a = empirical_conditional_density(s, 20, 40, uni);
    const auto b = empirical_conditional_density(s, 20, 40, ramp);
    double dist = 0.0, noise = 0.0;
    for (std::size_t i = 0; i < a.density.size(); ++i) {
        const double w = a.edges[i + 1] - a.edges[i];
        dist += w * std::abs(a.density[i] - b.density[i]);
        noise += 4 * w * std::hypot(a.std_error[i], b.std_error[i]);
    }
    CHECK(dist <= noise);

    // the same comparison at n = 0 sees the difference
    const auto a0 = empirical_conditional_density(s, 0, 40, uni);
    const auto b0 = empirical_conditional_density(s, 0, 40, ramp);
    double dist0 = 0.0;
    for (std::size_t i = 0; i < a0.density.size(); ++i)
        dist0 += (a0.edges[i + 1] - a0.edges[i]) * std::abs(a0.density[i] - b0.density[i]);
    CHECK(dist0 > 0.2);
}

TEST_CASE("starvation is reported")
{
    const OpenSystem s(preset_map("tripling"), kMarkov);
    CHECK_THROWS_AS(empirical_conditional_density(s, 20, 60, opts(10000)), ResolutionError);
    CHECK_THROWS_AS(empirical_conditional_density(s, 5, 0, opts(100)), std::invalid_argument);
    const auto rec = simulate_survival(s, 200, opts(1000));
    CHECK(rec.back().survivors == 0);
    CHECK(rec.size() < 201);
}
