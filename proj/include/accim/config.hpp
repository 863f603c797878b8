#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "accim/analysis.hpp"
#include "accim/interval_maps.hpp"
#include "accim/montecarlo.hpp"

namespace accim {

struct FamilyConfig {
    std::string shape = "centered"; // centered | right
    double point = 0.5;
    std::vector<double> sizes;
    HoleFamily build() const;
};

struct MonteCarloConfig {
    long long particles = 100000;
    int steps = 20;
    int bins = 60;
    int hist_step = 10;
    std::string initial = "uniform"; // uniform | ramp
    int window_begin = 5;
    int window_end = 15;
};

struct ExperimentConfig {
    std::optional<PiecewiseExpandingMap> map;
    Hole hole;
    std::optional<FamilyConfig> family;
    SolveOptions solve;
    int ulam_bins = 3000;
    MonteCarloConfig mc;
    std::uint64_t seed = 1;
    std::string output = "out";

    const PiecewiseExpandingMap& require_map() const;
    OpenSystem system() const { return OpenSystem(require_map(), hole); }
};

// Parses the YAML experiment format documented in the README. Errors carry the line number of the
// offending node (ConfigError).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Accepts plain numbers and rationals such as "1/3".
double parse_number(const std::string& s);

} // namespace accim
