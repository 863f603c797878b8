#pragma once

#include <memory>
#include <span>
#include <vector>

#include "accim/tower.hpp"

namespace accim {

// Sample layout on the tower: g uniform nodes in projected coordinates per cell.
class TowerGrid {
public:
    TowerGrid(std::shared_ptr<const Tower> tower, int samples_per_cell);

    const Tower& tower() const { return *tower_; }
    std::shared_ptr<const Tower> tower_ptr() const { return tower_; }
    int g() const { return g_; }
    int cell_count() const { return static_cast<int>(tower_->cells().size()); }
    std::size_t size() const { return y_.size(); }
    std::size_t offset(int cell) const { return static_cast<std::size_t>(cell) * g_; }

    double y(int cell, int s) const { return y_[offset(cell) + s]; }
    double z(int cell, int s) const { return z_[offset(cell) + s]; }
    double pi_derivative(int cell, int s) const { return dpi_[offset(cell) + s]; }
    // Quadrature weight of node s for integrals over the tower measure.
    double weight(std::size_t i) const { return w_[i]; }
    const std::vector<double>& weights() const { return w_; }

    // Value at projected point y of the piecewise-linear interpolant of cell samples.
    double interpolate(std::span<const double> values, int cell, double y) const;

private:
    std::shared_ptr<const Tower> tower_;
    int g_;
    std::vector<double> y_, z_, dpi_, w_;
};

class TowerDensity {
public:
    TowerDensity() = default;
    TowerDensity(std::shared_ptr<const TowerGrid> grid, std::vector<double> values);
    static TowerDensity constant(std::shared_ptr<const TowerGrid> grid, double c);

    const TowerGrid& grid() const { return *grid_; }
    std::shared_ptr<const TowerGrid> grid_ptr() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    std::span<const double> cell(int c) const { return {values_.data() + grid_->offset(c), static_cast<std::size_t>(grid_->g())}; }

    // Integral over the tower measure.
    double integral() const;
    double l1() const;

private:
    std::shared_ptr<const TowerGrid> grid_;
    std::vector<double> values_;
};

/**
 * \brief Discretised transfer operator of the tower map.
 *
 * Upstairs Pf(x) = f(F^{-1}x); on a base, Pf sums f/|F'| over the preimages in the return pieces.
 * Mass that falls into a tower hole or leaves the truncated tower is dropped.
 *
 * The matrix is the lumped-mass projection of P onto piecewise-linear hats on each cell, so the
 * integral of Pf is the surviving mass of f up to rounding, while pointwise values carry a first
 * order error in the node spacing.
 */
class TransferOperator {
public:
    TransferOperator(std::shared_ptr<const Tower> tower, int samples_per_cell = 16, int workers = 1);

    const TowerGrid& grid() const { return *grid_; }
    std::shared_ptr<const TowerGrid> grid_ptr() const { return grid_; }
    const Tower& tower() const { return grid_->tower(); }
    int workers() const { return workers_; }
    void set_workers(int w) { workers_ = w; }

    TowerDensity apply(const TowerDensity& f) const;
    TowerDensity uniform() const;
    // Integral of f over the part of the tower that neither falls into a hole nor leaves the truncation.
    double surviving_mass(const TowerDensity& f) const;
    std::size_t nonzeros() const { return val_.size(); }

private:
    std::shared_ptr<const TowerGrid> grid_;
    int workers_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_;
    std::vector<double> val_;
};

TowerDensity apply_P(const TransferOperator& op, const TowerDensity& f);
TowerDensity normalize(const TowerDensity& f);

struct FixedPointResult {
    TowerDensity phi;
    double lambda = 0.0;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    double mass_ratio_gap = 0.0; // |lambda - |P^{n+1}f|/|P^n f|| at the last step
};

FixedPointResult fixed_point(const TransferOperator& op, const TowerDensity& f0, double tol = 1e-10,
                             int max_iter = 100000);
FixedPointResult fixed_point(const TransferOperator& op, double tol = 1e-10, int max_iter = 100000);

struct DensityNorms {
    double sup = 0.0;    // max_l e^{-xi l} sup |f| on level l
    double holder = 0.0; // ||f||_r
    double norm = 0.0;   // max of the two
};

DensityNorms norms(const TowerDensity& f, double xi, double alpha);
// Same norms restricted to cells at level >= 1 (sup) / level 0, used by the Lasota-Yorke checks.
DensityNorms norms_on_levels(const TowerDensity& f, double xi, double alpha, int min_level, int max_level);

} // namespace accim
