#pragma once

#include <vector>

#include "accim/interval.hpp"

namespace accim {

// A finite measure on [0,1] with a density.
class IntervalDensity {
public:
    virtual ~IntervalDensity() = default;
    // nu([a,b])
    virtual double mass(double a, double b) const = 0;
    virtual double value(double x) const = 0;
    // Points where the density may jump.
    virtual std::vector<double> breakpoints() const = 0;
};

// Piecewise-constant density on uniform or explicit bins, restricted to a support set.
class HistogramDensity : public IntervalDensity {
public:
    HistogramDensity(std::vector<double> edges, std::vector<double> density,
                     std::vector<Interval> support = {{0.0, 1.0}});

    double mass(double a, double b) const override;
    double value(double x) const override;
    std::vector<double> breakpoints() const override;

    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& density() const { return density_; }

private:
    std::vector<double> edges_;
    std::vector<double> density_;
    std::vector<Interval> support_;
};

std::vector<double> uniform_edges(int bins);

// Sum over the cells of a partition of |nu_a(cell) - nu_b(cell)|. The partition is the uniform grid
// refined at the breakpoints of both densities, so it is exact for piecewise-constant densities
// aligned with their breakpoints and a lower bound otherwise.
double l1_distance(const IntervalDensity& a, const IntervalDensity& b, int grid = 4096);

} // namespace accim
