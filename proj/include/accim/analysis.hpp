#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "accim/conditions.hpp"
#include "accim/interval_density.hpp"
#include "accim/quadrature.hpp"
#include "accim/transfer_operator.hpp"

namespace accim {

/**
 * \brief Interval density obtained by pushing a tower density down with pi.
 *
 * psi(x) = sum over cells covering x of phi(pi^{-1}x)/pi'(pi^{-1}x), rescaled so that psi integrates
 * to one.
 */
class ProjectedDensity : public IntervalDensity {
public:
    explicit ProjectedDensity(TowerDensity phi);

    double mass(double a, double b) const override;
    double value(double x) const override;
    std::vector<double> breakpoints() const override;

    // nu([0,x])
    double cdf(double x) const;
    // Integral of fn against nu.
    template <class F>
    double integrate(F&& fn) const;

    // Factor applied to phi so that the projection has unit mass.
    double scale() const { return scale_; }
    const TowerDensity& phi() const { return phi_; }
    // Largest number of level-l cells above one base whose projections overlap at a point.
    int max_overlap(int level) const;

private:
    double cell_partial(int cell, double x) const; // integral of phi/pi' from projected.lo to x
    double cell_density(int cell, double y) const;

    TowerDensity phi_;
    double scale_ = 1.0;
    std::vector<std::vector<double>> node_cum_; // per cell, cumulative integral at sample nodes
    std::vector<double> cell_total_;
    std::vector<int> by_hi_;                    // cells sorted by projected.hi
    std::vector<double> hi_sorted_;
    std::vector<double> prefix_;                // prefix sums of cell_total_ over by_hi_
    std::vector<std::vector<int>> buckets_;     // cells overlapping each bucket
};

struct AccimResult {
    std::vector<double> edges;
    std::vector<double> psi; // bin averages nu(bin)/|bin|
    double lambda = 0.0;
    double escape_rate = 0.0;
    double sup_psi = 0.0;
    double inf_psi = 0.0;    // over I
    std::optional<double> variation;
    double lambda_interval = 0.0; // nu(T^{-1} I)
    double residual = 0.0;        // conditional invariance residual
    std::vector<HypothesisCheck> flags;
    std::shared_ptr<const ProjectedDensity> density;
};

// psi on a uniform grid plus pointwise sup/inf over I and (alpha = 1) the variation.
AccimResult project_density(const TowerDensity& phi, int grid = 4096);

// nu(T^{-1}I) = integral of the interval transfer operator applied to psi.
double interval_lambda(const OpenSystem& system, const IntervalDensity& psi);

// max over grid cells A of |nu(T^{-1}(A n I)) - lambda nu(A n I)|
double conditional_invariance_residual(const OpenSystem& system, const IntervalDensity& psi, double lambda,
                                       int grid = 4096);

struct BoundCheck {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
    bool skipped = false;
    std::string note;
};

std::vector<BoundCheck> density_bounds(const AccimResult& result, const ConstantsReport& report,
                                       const Tower& tower, int transitivity_horizon = 64);

struct SolveOptions {
    std::optional<double> delta;
    ConditionOptions conditions;
    TowerOptions tower;
    int samples_per_cell = 16;
    double tol = 1e-10;
    int max_iter = 100000;
    int grid = 4096;
    int workers = 1;
    int transitivity_horizon = 64;
};

struct Solution {
    std::shared_ptr<const Tower> tower;
    ConstantsReport constants;
    std::vector<HypothesisCheck> checks;
    std::shared_ptr<const TransferOperator> op;
    FixedPointResult fixed;
    AccimResult result;
    TransitivityResult transitivity;
};

Solution solve(const OpenSystem& system, const SolveOptions& options = {});
Solution srb_closed(const PiecewiseExpandingMap& map, const SolveOptions& options = {});

struct HoleFamily {
    std::string kind;          // "centered", "right" or "explicit"
    std::vector<double> sizes; // parameter s per member
    std::vector<Hole> holes;
};

HoleFamily centered_family(double point, const std::vector<double>& sizes);
HoleFamily right_family(double point, const std::vector<double>& sizes);

struct FamilyReport {
    bool mixing_ok = true; // covering condition for the largest hole
    std::optional<int> mixing_time;
};

// Orders the family by decreasing s and checks mH_s <= s, nesting, one component of H_s per
// component of H_t, and the endpoint condition. Throws FamilyError on violation.
FamilyReport validate_family(const PiecewiseExpandingMap& map, HoleFamily& family, int horizon = 64);

struct LipschitzRow {
    double s = 0.0;
    double mH = 0.0;
    double lambda = 1.0;
    double one_minus_lambda = 0.0;
    double C0 = 0.0;
    double bound = 0.0; // C0 mH
    double slack = 0.0; // bound - (1 - lambda)
    double ratio = 0.0; // (1 - lambda)/mH
    bool pass = true;
    bool a1_pass = true;
};

std::vector<LipschitzRow> lipschitz_study(const PiecewiseExpandingMap& map, HoleFamily family,
                                          const SolveOptions& options = {});

struct TestFunction {
    std::string name;
    int kind;        // 0: polynomial x^power, 1: indicator of [lo,hi)
    int power = 0;
    double lo = 0.0, hi = 0.0;
};

// Fixed weak-convergence battery: 1, x, x^2 and indicators of the dyadic intervals of length 1/2 and 1/4.
const std::vector<TestFunction>& weak_battery();
inline constexpr const char* kWeakBatteryVersion = "battery-v1";
double integrate_test_function(const IntervalDensity& nu, const TestFunction& f);

struct ShrinkStudyRow {
    double s = 0.0;
    double mH = 0.0;
    double lambda = 1.0;
    double one_minus_lambda_over_mH = 0.0;
    double l1_dist = 0.0;
    std::vector<double> weak_dists;
    double residual = 0.0;
};

std::vector<ShrinkStudyRow> shrink_study(const PiecewiseExpandingMap& map, HoleFamily family,
                                         const std::vector<TestFunction>& battery = weak_battery(),
                                         const SolveOptions& options = {});

// ---------------------------------------------------------------- template

template <class F>
double ProjectedDensity::integrate(F&& fn) const
{
    const auto& grid = phi_.grid();
    const auto& t = grid.tower();
    double s = 0.0;
    for (const auto& c : t.cells()) {
        for (int k = 0; k + 1 < grid.g(); ++k) {
            const double a = grid.y(c.id, k), b = grid.y(c.id, k + 1);
            const double c0 = 0.5 * (a + b), h = 0.5 * (b - a);
            for (int i = 0; i < 5; ++i) {
                const double y = c0 + h * kGaussNodes[i];
                s += h * kGaussWeights[i] * fn(y) * cell_density(c.id, y);
            }
        }
    }
    return s;
}

} // namespace accim
