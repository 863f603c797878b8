#pragma once

#include <algorithm>
#include <vector>

namespace accim {

// Geometric tolerance for point-in-interval classification.
inline constexpr double kGeoEps = 1e-12;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x, double eps = kGeoEps) const { return x >= lo - eps && x <= hi + eps; }
    bool contains_open(double x, double eps = kGeoEps) const { return x > lo + eps && x < hi - eps; }
    bool covers(const Interval& o, double eps = kGeoEps) const { return lo <= o.lo + eps && hi >= o.hi - eps; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval intersect(const Interval& a, const Interval& b)
{
    return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

// Union of intervals as a sorted list of disjoint intervals; pieces closer than eps are joined.
inline std::vector<Interval> merge_intervals(std::vector<Interval> v, double eps = kGeoEps)
{
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    for (const auto& iv : v) {
        if (iv.hi < iv.lo)
            continue;
        if (!out.empty() && iv.lo <= out.back().hi + eps)
            out.back().hi = std::max(out.back().hi, iv.hi);
        else
            out.push_back(iv);
    }
    return out;
}

inline double total_length(const std::vector<Interval>& v)
{
    double s = 0.0;
    for (const auto& iv : v)
        s += iv.length();
    return s;
}

} // namespace accim
