#include "accim/interval_density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace accim {

HistogramDensity::HistogramDensity(std::vector<double> edges, std::vector<double> density,
                                   std::vector<Interval> support)
    : edges_(std::move(edges)), density_(std::move(density)), support_(std::move(support))
{
    if (edges_.size() != density_.size() + 1)
        throw std::invalid_argument("histogram needs one more edge than values");
}

double HistogramDensity::mass(double a, double b) const
{
    if (b <= a)
        return 0.0;
    const auto first = std::upper_bound(edges_.begin(), edges_.end(), a) - edges_.begin() - 1;
    double s = 0.0;
    for (auto i = std::max<std::ptrdiff_t>(0, first); i + 1 < static_cast<std::ptrdiff_t>(edges_.size()); ++i) {
        if (edges_[i] >= b)
            break;
        const Interval cell = intersect({edges_[i], edges_[i + 1]}, {a, b});
        if (cell.length() <= 0.0 || density_[i] == 0.0)
            continue;
        double len = 0.0;
        for (const auto& sup : support_)
            len += std::max(0.0, intersect(cell, sup).length());
        s += density_[i] * len;
    }
    return s;
}

double HistogramDensity::value(double x) const
{
    bool in = false;
    for (const auto& sup : support_)
        in = in || sup.contains(x, 0.0);
    if (!in || x < edges_.front() || x > edges_.back())
        return 0.0;
    auto i = std::upper_bound(edges_.begin(), edges_.end(), x) - edges_.begin() - 1;
    i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(density_.size()) - 1);
    return density_[i];
}

std::vector<double> HistogramDensity::breakpoints() const
{
    std::vector<double> p = edges_;
    for (const auto& sup : support_) {
        p.push_back(sup.lo);
        p.push_back(sup.hi);
    }
    return p;
}

std::vector<double> uniform_edges(int bins)
{
    std::vector<double> e(bins + 1);
    for (int i = 0; i <= bins; ++i)
        e[i] = static_cast<double>(i) / bins;
    return e;
}

double l1_distance(const IntervalDensity& a, const IntervalDensity& b, int grid)
{
    std::vector<double> pts = uniform_edges(grid);
    for (double x : a.breakpoints())
        pts.push_back(x);
    for (double x : b.breakpoints())
        pts.push_back(x);
    std::sort(pts.begin(), pts.end());
    std::vector<double> u;
    for (double x : pts)
        if (x >= 0.0 && x <= 1.0 && (u.empty() || x - u.back() > 1e-15))
            u.push_back(x);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i)
        s += std::abs(a.mass(u[i], u[i + 1]) - b.mass(u[i], u[i + 1]));
    return s;
}

} // namespace accim
