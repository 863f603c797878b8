#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "accim/interval_maps.hpp"

namespace accim {

// ---------------------------------------------------------------- growth partitions

enum class ElementFate { ReturnsTo, FallsInHole };

struct PartitionElement {
    Interval omega;          // subinterval of the seed interval
    int stop_time = 0;
    ElementFate fate = ElementFate::ReturnsTo;
    int target = -1;         // Q index (ReturnsTo) or hole component (FallsInHole)
    double measure = 0.0;    // |omega|, computed from the Jacobian rather than endpoint differences
    Interval image;          // T^S(omega)
    std::vector<int> itinerary;
};

struct GrowthOptions {
    int n_max = 60;
    // Reject holes with h > delta(mu-2)/2 instead of recording the violation.
    bool enforce_hole_bound = false;
    std::size_t max_pieces = 1u << 22;
};

struct GrowthPartition {
    std::vector<PartitionElement> elements;
    std::vector<Interval> remainder;   // pieces with S > n_max
    std::vector<double> tail;          // tail[n] = m{S > n}, n = 0..n_max
    double hole_mass = 0.0;
    double remainder_mass = 0.0;
    bool hole_bound_ok = true;
};

GrowthPartition growth_partition(const OpenSystem& system, const Interval& omega, double delta,
                                 const GrowthOptions& options = {});

// h <= delta(mu-2)/2
bool hole_bound_holds(const OpenSystem& system, double delta);

// Measure of the set of x in a branch-chain cylinder whose image under the chain is `image`:
// integral over `image` of 1/|(T^n)'| at the backward orbit.
double pullback_measure(const PiecewiseExpandingMap& map, const std::vector<int>& itinerary,
                        const Interval& image);

// ---------------------------------------------------------------- tower

double choose_delta(const OpenSystem& system, double margin = 0.01);
std::vector<Interval> build_bases(const OpenSystem& system, double delta);

enum class PieceFate { Continue, Return, Hole, Truncated };

// Part of a cell on which the next step of F^ has a single outcome.
struct CellPiece {
    Interval span;        // projected coordinates
    Interval image;       // T^ of span
    PieceFate fate;
    int target = -1;      // child cell, base index or hole component
    double z_begin = 0.0; // offsets inside the cell, tower measure
    double z_end = 0.0;
    double min_derivative = 0.0; // F^' range over a Return piece
    double max_derivative = 0.0;
};

struct TowerCell {
    int id = 0;
    int base = 0;
    int level = 0;
    int index = 0;        // position among cells with the same base and level
    int parent = -1;
    int q = 0;            // Q element containing the projection
    int orientation = 1;  // +1 when pi increases with the tower coordinate
    Interval projected;   // pi(cell)
    double measure = 0.0; // tower measure
    std::vector<int> itinerary; // branches applied from the base up to this level
    std::vector<CellPiece> pieces;
    std::vector<double> z_table; // z offsets at uniform projected nodes (kZTableIntervals + 1)
    std::vector<double> z_slope; // dz/dy at the same nodes

    int branch(const OpenSystem& s) const { return s.q(q).branch; }
};

struct TowerHole {
    int base = 0;
    int level = 0;        // level of the lifted hole, one above the cell it comes from
    int cell = 0;
    int component = 0;
    Interval span;        // projected coordinates in the cell below
    double measure = 0.0;
};

struct TowerPoint {
    int cell = 0;
    double offset = 0.0;
};

struct TowerOptions {
    int l_max = 60;
    double tail_tolerance = 1e-9; // relative to m(I)
    int level_cap = 2000;
    bool enforce_hole_bound = false;
    std::size_t max_cells = 400000;
    // Truncate below l_max as soon as the untracked mass is under tail_tolerance. Without this,
    // nonlinear maps with generic holes need exponentially many cells to reach l_max.
    bool stop_early = true;
};

class Tower {
public:
    static constexpr int kZTableIntervals = 16;

    const OpenSystem& system() const { return system_; }
    const std::vector<Interval>& bases() const { return bases_; }
    int N() const { return static_cast<int>(bases_.size()); }
    double delta() const { return delta_; }
    const std::vector<TowerCell>& cells() const { return cells_; }
    const TowerCell& cell(int id) const { return cells_[id]; }
    const std::vector<TowerHole>& holes() const { return holes_; }
    int l_max() const { return l_max_; }
    int top_level() const { return static_cast<int>(level_mass_.size()) - 1; }
    double tail_mass() const { return tail_mass_; }
    bool tail_converged() const { return tail_converged_; }
    bool hole_bound_ok() const { return hole_bound_ok_; }
    // m(Delta_l): tower measure of the cells at level l.
    double level_mass(int l) const { return l < static_cast<int>(level_mass_.size()) ? level_mass_[l] : 0.0; }
    // m(H~_l)
    double hole_mass(int l) const { return l < static_cast<int>(hole_mass_.size()) ? hole_mass_[l] : 0.0; }
    int hole_levels() const { return static_cast<int>(hole_mass_.size()); }

    // pi'(y) for the cell point projecting to y: |Lambda| * |(T^l)'| at the backward orbit.
    double pi_derivative(int cell, double y) const;
    // Tower offset of the point of `cell` projecting to y.
    double z_offset(int cell, double y) const;
    double project(const TowerPoint& p) const;
    // F^ on the tower; empty when the point falls into a tower hole or leaves the truncated tower.
    std::optional<TowerPoint> apply(const TowerPoint& p) const;
    // F^' at the cell point projecting to y (y inside a Return piece targeting `base`).
    double return_derivative(int cell, int base, double y) const;
    // Backward orbit of y to the base: the point of Lambda^(base) that reaches y after `level` steps.
    double base_preimage(int cell, double y) const;

private:
    friend Tower build_tower(const OpenSystem&, double, const TowerOptions&);

    OpenSystem system_;
    std::vector<Interval> bases_;
    double delta_ = 0.0;
    std::vector<TowerCell> cells_;
    std::vector<TowerHole> holes_;
    std::vector<double> level_mass_;
    std::vector<double> hole_mass_;
    int l_max_ = 0;
    double tail_mass_ = 0.0;
    bool tail_converged_ = true;
    bool hole_bound_ok_ = true;

    explicit Tower(OpenSystem s) : system_(std::move(s)) {}
};

Tower build_tower(const OpenSystem& system, double delta, const TowerOptions& options = {});

double project(const Tower& tower, int cell, double offset);

} // namespace accim
