#pragma once

#include <optional>
#include <string>
#include <vector>

#include "accim/interval.hpp"

namespace accim {

enum class BranchForm { Affine, Polynomial, Sinusoid };

/**
 * \brief One monotone branch of a piecewise expanding map.
 *
 * The branch is x -> p(x) + amp*sin(2*pi*freq*x + phase) - shift on `domain`,
 * where p is the polynomial with coefficients `poly` (constant term first).
 */
struct Branch {
    Interval domain;
    std::vector<double> poly;
    double sin_amp = 0.0;
    double sin_freq = 0.0;
    double sin_phase = 0.0;
    double shift = 0.0;

    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

    // Preimage of y inside the domain. Values outside the branch image clamp to an endpoint.
    double inverse(double y) const;
    // Sorted image of a subinterval of the domain, clamped to [0,1].
    Interval image(const Interval& j) const;
    Interval image() const { return image(domain); }

    bool increasing() const;
    BranchForm form() const;
};

class PiecewiseExpandingMap {
public:
    struct Evaluation {
        double image;
        double derivative;
        int branch;
    };

    // mu and holder_const are estimated by dense sampling when not supplied; supplied values are
    // validated against the same sampling. `wrap` sends an image value of exactly 1 to 0
    // (T(x) = g(x) mod 1 convention).
    PiecewiseExpandingMap(std::vector<Branch> branches, double alpha,
                          std::optional<double> holder_const = std::nullopt,
                          std::optional<double> mu = std::nullopt, bool wrap = true);

    const std::vector<Branch>& branches() const { return branches_; }
    const Branch& branch(int b) const { return branches_[b]; }
    int branch_count() const { return static_cast<int>(branches_.size()); }
    double alpha() const { return alpha_; }
    double holder_const() const { return holder_const_; }
    double mu() const { return mu_; }
    // max |T'| over [0,1] (eta).
    double max_derivative() const { return eta_; }
    bool wrap() const { return wrap_; }
    const std::string& name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }

    int branch_index(double x) const;
    Evaluation evaluate(double x) const;
    // |(T^n)'(x)| along the given branch itinerary.
    double composite_derivative(const std::vector<int>& itinerary, double x) const;

private:
    std::vector<Branch> branches_;
    double alpha_;
    double holder_const_ = 0.0;
    double mu_ = 0.0;
    double eta_ = 0.0;
    bool wrap_ = true;
    std::string name_;
};

// Branches of x -> g(x) mod 1 where g(x) = p(x) + amp*sin(2*pi*freq*x + phase), g(0) = 0,
// g increasing with integer g(1). Branch boundaries are the points where g crosses an integer.
PiecewiseExpandingMap make_lift_map(std::vector<double> poly, double sin_amp, double sin_freq,
                                    double sin_phase, double alpha,
                                    std::optional<double> holder_const = std::nullopt,
                                    std::optional<double> mu = std::nullopt);

class Hole {
public:
    Hole() = default;
    explicit Hole(std::vector<Interval> intervals);

    const std::vector<Interval>& intervals() const { return intervals_; }
    int count() const { return static_cast<int>(intervals_.size()); }
    bool empty() const { return intervals_.empty(); }
    double measure() const;
    double max_length() const;
    // Open-interval membership; points within kGeoEps of an endpoint survive.
    bool contains(double x) const;
    int component(double x) const;

private:
    std::vector<Interval> intervals_;
};

// Element of the monotonicity partition Q of the surviving set.
struct QElement {
    Interval interval;
    int branch;
};

// Classification of a piece of an image interval against the atoms Q and H.
struct ImagePiece {
    enum class Kind { Covers, Partial, InHole };
    Interval span;
    Kind kind;
    int index; // Q index for Covers/Partial, hole component for InHole
};

class OpenSystem {
public:
    OpenSystem(PiecewiseExpandingMap map, Hole hole);

    const PiecewiseExpandingMap& map() const { return map_; }
    const Hole& hole() const { return hole_; }
    const std::vector<QElement>& partition() const { return q_; }
    const QElement& q(int k) const { return q_[k]; }
    int K() const { return static_cast<int>(q_.size()); }
    double d() const { return d_; }
    double D_len() const { return D_len_; }
    // m(I) = sum of Q lengths.
    double surviving_measure() const;
    // I as a union of disjoint closed intervals.
    std::vector<Interval> surviving_set() const;

    // Q element containing x (lower index at shared endpoints), or -1 if x is in the hole.
    int q_index(double x) const;

    // Cuts an interval of [0,1] at every atom boundary strictly inside it and classifies the pieces,
    // left to right.
    std::vector<ImagePiece> decompose(const Interval& image) const;

private:
    PiecewiseExpandingMap map_;
    Hole hole_;
    std::vector<QElement> q_;
    std::vector<double> cuts_;      // sorted atom boundaries including 0 and 1
    std::vector<int> atom_kind_;    // per segment: Q index >= 0, or -(hole+1)
    double d_ = 0.0;
    double D_len_ = 0.0;
};

OpenSystem build_open_system(PiecewiseExpandingMap map, Hole hole);

// C~ = exp(C^/(mu(mu^alpha - 1))) - 1
double distortion_constant(double holder_const, double mu, double alpha);
double distortion_constant(const PiecewiseExpandingMap& map);

// Fraction of `grid` midpoints whose orbit stays outside the hole for steps 0..n, i.e. m(I^n).
double survivor_measure(const OpenSystem& system, int n, int grid = 1000000);

} // namespace accim
