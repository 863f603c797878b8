#include "accim/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "accim/errors.hpp"
#include "accim/parallel.hpp"

namespace accim {

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ stream) ^ counter);
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
{
    return static_cast<double>(counter_hash(seed, stream, counter) >> 11) * 0x1.0p-53;
}

InitialDistribution InitialDistribution::uniform()
{
    return {"uniform", [](double u) { return u; }};
}

InitialDistribution InitialDistribution::ramp()
{
    return {"ramp", [](double u) { return std::sqrt(u); }};
}

InitialDistribution InitialDistribution::from_histogram(const HistogramDensity& h, std::string name)
{
    const auto& e = h.edges();
    std::vector<double> cum{0.0};
    for (std::size_t i = 0; i + 1 < e.size(); ++i)
        cum.push_back(cum.back() + h.mass(e[i], e[i + 1]));
    if (!(cum.back() > 0.0))
        throw std::invalid_argument("initial histogram has zero mass");
    for (auto& c : cum)
        c /= cum.back();
    return {std::move(name), [e, cum](double u) {
                const auto k = std::clamp<std::ptrdiff_t>(
                    std::upper_bound(cum.begin(), cum.end(), u) - cum.begin() - 1, 0,
                    static_cast<std::ptrdiff_t>(e.size()) - 2);
                const double w = cum[k + 1] - cum[k];
                const double t = w > 0.0 ? (u - cum[k]) / w : 0.0;
                return e[k] + t * (e[k + 1] - e[k]);
            }};
}

namespace {

constexpr int kMaxRejections = 100000;

double draw_initial(const OpenSystem& system, const MonteCarloOptions& opt, std::uint64_t particle)
{
    for (int c = 0; c < kMaxRejections; ++c) {
        const double x = std::clamp(opt.initial.inverse_cdf(counter_uniform(opt.seed, particle, c)), 0.0, 1.0);
        if (!system.hole().contains(x))
            return x;
    }
    throw ResolutionError("initial distribution puts (almost) no mass outside the hole");
}

// Runs one particle; returns the number of steps it survives (capped at steps) and its final point.
std::pair<int, double> run_particle(const OpenSystem& system, const MonteCarloOptions& opt, std::uint64_t particle,
                                    int steps)
{
    double x = draw_initial(system, opt, particle);
    const auto& map = system.map();
    for (int n = 1; n <= steps; ++n) {
        x = map.evaluate(x).image;
        if (system.hole().contains(x))
            return {n - 1, x};
    }
    return {steps, x};
}

std::vector<std::pair<int, double>> run_all(const OpenSystem& system, int steps, const MonteCarloOptions& opt)
{
    if (opt.particles < 1)
        throw std::invalid_argument("need at least one particle");
    if (steps < 0)
        throw std::invalid_argument("negative step count");
    std::vector<std::pair<int, double>> out(static_cast<std::size_t>(opt.particles));
    parallel_for(out.size(), opt.workers,
                 [&](std::size_t i) { out[i] = run_particle(system, opt, static_cast<std::uint64_t>(i), steps); });
    return out;
}

} // namespace

std::vector<SurvivalRecord> simulate_survival(const OpenSystem& system, int steps, const MonteCarloOptions& options)
{
    const auto runs = run_all(system, steps, options);
    // alive[n] = particles surviving at least n steps
    std::vector<long long> dead_after(steps + 1, 0);
    for (const auto& r : runs)
        ++dead_after[r.first];
    std::vector<SurvivalRecord> rec;
    long long alive = options.particles;
    const double n0 = static_cast<double>(options.particles);
    for (int n = 0; n <= steps; ++n) {
        SurvivalRecord r;
        r.n = n;
        r.survivors = alive;
        r.p_n = alive / n0;
        r.std_error = std::sqrt(r.p_n * (1.0 - r.p_n) / n0);
        rec.push_back(r);
        alive -= dead_after[n];
        if (rec.back().survivors == 0)
            break;
    }
    for (std::size_t i = 0; i + 1 < rec.size(); ++i)
        rec[i].ratio = rec[i].p_n > 0.0 ? rec[i + 1].p_n / rec[i].p_n : 0.0;
    return rec;
}

EscapeFit fit_escape_ratio(const std::vector<SurvivalRecord>& records, int n0, int n1)
{
    double num = 0.0, den = 0.0;
    for (const auto& r : records) {
        if (r.n < n0 || r.n >= n1)
            continue;
        const auto next = std::find_if(records.begin(), records.end(), [&](const auto& x) { return x.n == r.n + 1; });
        if (next == records.end())
            continue;
        num += static_cast<double>(next->survivors);
        den += static_cast<double>(r.survivors);
    }
    if (!(den > 0.0))
        throw ResolutionError("no survivors in the fit window; use more particles or an earlier window");
    EscapeFit f;
    f.lambda = num / den;
    f.sigma = std::sqrt(std::max(0.0, f.lambda * (1.0 - f.lambda)) / den);
    return f;
}

EmpiricalHistogram empirical_conditional_density(const OpenSystem& system, int n, int bins,
                                                 const MonteCarloOptions& options, int min_per_bin)
{
    if (bins < 1)
        throw std::invalid_argument("need at least one bin");
    const auto runs = run_all(system, n, options);
    EmpiricalHistogram h;
    h.edges = uniform_edges(bins);
    std::vector<long long> count(bins, 0);
    for (const auto& r : runs) {
        if (r.first < n)
            continue;
        ++count[std::clamp(static_cast<int>(std::floor(r.second * bins)), 0, bins - 1)];
        ++h.survivors;
    }
    if (h.survivors < static_cast<long long>(min_per_bin) * bins)
        throw ResolutionError("only " + std::to_string(h.survivors) + " particles survive " + std::to_string(n) +
                              " steps for " + std::to_string(bins) + " bins; increase the particle count");
    const double s = static_cast<double>(h.survivors);
    for (int i = 0; i < bins; ++i) {
        const double w = h.edges[i + 1] - h.edges[i];
        const double p = count[i] / s;
        h.density.push_back(p / w);
        h.std_error.push_back(std::sqrt(p * (1.0 - p) / s) / w);
    }
    return h;
}

} // namespace accim
