#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "accim/interval_density.hpp"
#include "accim/interval_maps.hpp"

namespace accim {

// SplitMix64 finaliser applied to (seed, stream, counter); every particle owns its own stream.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);
// Uniform double in [0,1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

struct InitialDistribution {
    std::string name;
    std::function<double(double)> inverse_cdf; // on [0,1]

    static InitialDistribution uniform();
    // density 2x
    static InitialDistribution ramp();
    static InitialDistribution from_histogram(const HistogramDensity& h, std::string name = "custom");
};

struct SurvivalRecord {
    int n = 0;
    long long survivors = 0;
    double p_n = 0.0;
    double ratio = 0.0;     // p_{n+1}/p_n, 0 when undefined
    double std_error = 0.0; // binomial standard error of p_n
};

struct MonteCarloOptions {
    long long particles = 100000;
    std::uint64_t seed = 1;
    int workers = 1;
    InitialDistribution initial = InitialDistribution::uniform();
};

// Initial points are drawn from `initial` restricted to I (hole draws are rejected and redrawn
// from the same particle stream). Records n = 0..steps; stops early once every particle is dead.
std::vector<SurvivalRecord> simulate_survival(const OpenSystem& system, int steps, const MonteCarloOptions& options);

struct EscapeFit {
    double lambda = 0.0;
    double sigma = 0.0;
};

// lambda = sum s_{n+1} / sum s_n over n in [n0, n1).
EscapeFit fit_escape_ratio(const std::vector<SurvivalRecord>& records, int n0, int n1);

struct EmpiricalHistogram {
    std::vector<double> edges;
    std::vector<double> density;
    std::vector<double> std_error;
    long long survivors = 0;
};

// Normalised histogram of the particles still alive after n steps. Needs at least
// `min_per_bin` survivors per bin on average, else throws ResolutionError.
EmpiricalHistogram empirical_conditional_density(const OpenSystem& system, int n, int bins,
                                                 const MonteCarloOptions& options, int min_per_bin = 10);

} // namespace accim
