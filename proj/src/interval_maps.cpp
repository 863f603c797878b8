#include "accim/interval_maps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "accim/errors.hpp"

namespace accim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kSamplesPerBranch = 20001;

double horner(const std::vector<double>& c, double x)
{
    double s = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        s = s * x + *it;
    return s;
}

// Golden-section maximisation of f on [a,b].
template <class F>
double golden_max(F&& f, double a, double b)
{
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - r * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + r * (b - a); fd = f(d);
        }
    }
    return std::max({f(a), f(b), fc, fd});
}

// Sampled maximum of f over [lo,hi] refined around the best sample.
template <class F>
double refined_max(F&& f, double lo, double hi, int n)
{
    double best = -INFINITY;
    int arg = 0;
    const double h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double v = f(lo + i * h);
        if (v > best) {
            best = v;
            arg = i;
        }
    }
    const double a = lo + std::max(0, arg - 1) * h;
    const double b = lo + std::min(n - 1, arg + 1) * h;
    return std::max(best, golden_max(f, a, b));
}

} // namespace

// ---------------------------------------------------------------- Branch

double Branch::value(double x) const
{
    double v = horner(poly, x) - shift;
    if (sin_amp != 0.0)
        v += sin_amp * std::sin(kTwoPi * sin_freq * x + sin_phase);
    return v;
}

double Branch::derivative(double x) const
{
    double s = 0.0;
    for (std::size_t k = poly.size(); k-- > 1;)
        s = s * x + static_cast<double>(k) * poly[k];
    if (sin_amp != 0.0)
        s += sin_amp * kTwoPi * sin_freq * std::cos(kTwoPi * sin_freq * x + sin_phase);
    return s;
}

double Branch::second_derivative(double x) const
{
    double s = 0.0;
    for (std::size_t k = poly.size(); k-- > 2;)
        s = s * x + static_cast<double>(k * (k - 1)) * poly[k];
    if (sin_amp != 0.0) {
        const double w = kTwoPi * sin_freq;
        s -= sin_amp * w * w * std::sin(w * x + sin_phase);
    }
    return s;
}

bool Branch::increasing() const { return derivative(domain.mid()) > 0.0; }

BranchForm Branch::form() const
{
    if (sin_amp != 0.0)
        return BranchForm::Sinusoid;
    return poly.size() <= 2 ? BranchForm::Affine : BranchForm::Polynomial;
}

double Branch::inverse(double y) const
{
    const bool inc = increasing();
    if (form() == BranchForm::Affine) {
        const double c0 = poly.empty() ? 0.0 : poly[0];
        const double c1 = poly.size() > 1 ? poly[1] : 0.0;
        return std::clamp((y + shift - c0) / c1, domain.lo, domain.hi);
    }
    double a = domain.lo, b = domain.hi;
    const double va = value(a), vb = value(b);
    if (inc ? y <= va : y >= va)
        return a;
    if (inc ? y >= vb : y <= vb)
        return b;
    double x = a + (y - va) / (vb - va) * (b - a);
    for (int it = 0; it < 200; ++it) {
        const double f = value(x) - y;
        if (f == 0.0)
            return x;
        if ((f < 0.0) == inc)
            a = x;
        else
            b = x;
        const double step = f / derivative(x);
        // test before the bracket fallback: at the root x - step can round onto the end just moved to x
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x)))
            return std::clamp(x - step, a, b);
        double xn = x - step;
        if (!(xn > a && xn < b))
            xn = 0.5 * (a + b);
        if (b - a <= 2e-16 * std::max(1.0, std::abs(x)))
            return xn;
        x = xn;
    }
    return x;
}

Interval Branch::image(const Interval& j) const
{
    double u = value(j.lo), v = value(j.hi);
    if (u > v)
        std::swap(u, v);
    return {std::clamp(u, 0.0, 1.0), std::clamp(v, 0.0, 1.0)};
}

// ---------------------------------------------------------------- map

PiecewiseExpandingMap::PiecewiseExpandingMap(std::vector<Branch> branches, double alpha,
                                             std::optional<double> holder_const,
                                             std::optional<double> mu, bool wrap)
    : branches_(std::move(branches)), alpha_(alpha), wrap_(wrap)
{
    if (!(alpha_ > 0.0 && alpha_ <= 1.0))
        throw std::invalid_argument("alpha must lie in (0,1]");
    if (branches_.empty())
        throw std::invalid_argument("map needs at least one branch");
    if (std::abs(branches_.front().domain.lo) > kGeoEps || std::abs(branches_.back().domain.hi - 1.0) > kGeoEps)
        throw std::invalid_argument("branch domains must cover [0,1]");
    for (std::size_t b = 0; b < branches_.size(); ++b) {
        const auto& br = branches_[b];
        if (!(br.domain.hi > br.domain.lo))
            throw std::invalid_argument("branch " + std::to_string(b) + " has an empty domain");
        if (b + 1 < branches_.size() && std::abs(br.domain.hi - branches_[b + 1].domain.lo) > kGeoEps)
            throw std::invalid_argument("branch domains must tile [0,1] without gaps or overlaps");
    }

    double min_d = INFINITY, max_d = 0.0, max_dd = 0.0, max_len = 0.0;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
        const auto& br = branches_[b];
        const double lo = br.domain.lo, hi = br.domain.hi;
        max_len = std::max(max_len, hi - lo);
        const bool inc = br.derivative(0.5 * (lo + hi)) > 0.0;
        const double h = (hi - lo) / (kSamplesPerBranch - 1);
        for (int i = 0; i < kSamplesPerBranch; ++i) {
            const double x = lo + i * h;
            const double dx = br.derivative(x);
            if (dx == 0.0 || (dx > 0.0) != inc)
                throw std::invalid_argument("branch " + std::to_string(b) + " is not strictly monotone");
            const double v = br.value(x);
            if (v < -1e-9 || v > 1.0 + 1e-9)
                throw std::invalid_argument("branch " + std::to_string(b) + " leaves [0,1]");
        }
        min_d = std::min(min_d, -refined_max([&](double x) { return -std::abs(br.derivative(x)); }, lo, hi,
                                             kSamplesPerBranch));
        max_d = std::max(max_d, refined_max([&](double x) { return std::abs(br.derivative(x)); }, lo, hi,
                                            kSamplesPerBranch));
        max_dd = std::max(max_dd, refined_max([&](double x) { return std::abs(br.second_derivative(x)); }, lo,
                                              hi, kSamplesPerBranch));
    }
    eta_ = max_d;

    if (mu) {
        if (*mu > min_d * (1.0 + 1e-9))
            throw std::invalid_argument("supplied mu exceeds the sampled minimum of |T'| (" +
                                        std::to_string(min_d) + ")");
        mu_ = *mu;
    } else {
        mu_ = min_d;
    }
    if (!(mu_ > 2.0))
        throw std::invalid_argument("expansion mu must exceed 2 (got " + std::to_string(mu_) + ")");

    // Hoelder constant of T' on each branch: sup|T''| * len^(1-alpha) bounds it.
    const double c_est = max_dd * std::pow(max_len, 1.0 - alpha_);
    if (holder_const) {
        if (*holder_const < 0.0)
            throw std::invalid_argument("holder_const must be non-negative");
        for (std::size_t b = 0; b < branches_.size(); ++b) {
            const auto& br = branches_[b];
            const int n = 2049;
            const double h = br.domain.length() / (n - 1);
            for (int stride = 1; stride < n; stride *= 2)
                for (int i = 0; i + stride < n; i += std::max(1, stride / 4)) {
                    const double x = br.domain.lo + i * h, y = br.domain.lo + (i + stride) * h;
                    const double lhs = std::abs(br.derivative(x) - br.derivative(y));
                    if (lhs > *holder_const * std::pow(std::abs(x - y), alpha_) * (1.0 + 1e-9) + 1e-14)
                        throw std::invalid_argument("supplied holder_const is violated on branch " +
                                                    std::to_string(b));
                }
        }
        holder_const_ = *holder_const;
    } else {
        holder_const_ = c_est == 0.0 ? 0.0 : c_est * (1.0 + 1e-9);
    }
}

int PiecewiseExpandingMap::branch_index(double x) const
{
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError("point " + std::to_string(x) + " outside [0,1]");
    for (std::size_t b = 0; b < branches_.size(); ++b)
        if (x <= branches_[b].domain.hi)
            return static_cast<int>(b);
    return static_cast<int>(branches_.size()) - 1;
}

PiecewiseExpandingMap::Evaluation PiecewiseExpandingMap::evaluate(double x) const
{
    const int b = branch_index(x);
    const auto& br = branches_[b];
    double v = br.value(x);
    if (wrap_ && v >= 1.0)
        v -= 1.0;
    v = std::clamp(v, 0.0, 1.0);
    return {v, br.derivative(x), b};
}

double PiecewiseExpandingMap::composite_derivative(const std::vector<int>& itinerary, double x) const
{
    double j = 1.0;
    for (int b : itinerary) {
        const auto& br = branches_[b];
        j *= std::abs(br.derivative(x));
        x = std::clamp(br.value(x), 0.0, 1.0);
    }
    return j;
}

PiecewiseExpandingMap make_lift_map(std::vector<double> poly, double sin_amp, double sin_freq,
                                    double sin_phase, double alpha, std::optional<double> holder_const,
                                    std::optional<double> mu)
{
    Branch g{{0.0, 1.0}, poly, sin_amp, sin_freq, sin_phase, 0.0};
    if (std::abs(g.value(0.0)) > 1e-12)
        throw std::invalid_argument("lift must satisfy g(0) = 0");
    const double g1 = g.value(1.0);
    const int K = static_cast<int>(std::lround(g1));
    if (std::abs(g1 - K) > 1e-9 || K < 1)
        throw std::invalid_argument("lift must satisfy g(1) = integer >= 1");

    std::vector<double> cuts{0.0};
    for (int k = 1; k < K; ++k) {
        double x;
        if (g.form() == BranchForm::Affine) {
            x = (k - poly[0]) / poly[1];
        } else {
            double a = cuts.back(), b = 1.0;
            x = 0.5 * (a + b);
            for (int it = 0; it < 300 && b - a > 1e-16; ++it) {
                const double f = g.value(x) - k;
                if (f == 0.0)
                    break;
                (f < 0.0 ? a : b) = x;
                double xn = x - f / g.derivative(x);
                if (!(xn > a && xn < b))
                    xn = 0.5 * (a + b);
                if (xn == x)
                    break;
                x = xn;
            }
        }
        cuts.push_back(x);
    }
    cuts.push_back(1.0);

    std::vector<Branch> branches;
    for (int k = 0; k < K; ++k)
        branches.push_back(Branch{{cuts[k], cuts[k + 1]}, poly, sin_amp, sin_freq, sin_phase, static_cast<double>(k)});
    return PiecewiseExpandingMap(std::move(branches), alpha, holder_const, mu, true);
}

// ---------------------------------------------------------------- hole

Hole::Hole(std::vector<Interval> intervals) : intervals_(std::move(intervals))
{
    std::sort(intervals_.begin(), intervals_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        const auto& h = intervals_[i];
        if (!(h.lo < h.hi) || h.lo < 0.0 || h.hi > 1.0)
            throw std::invalid_argument("hole interval must be a nonempty open subinterval of [0,1]");
        if (i > 0 && h.lo < intervals_[i - 1].hi)
            throw std::invalid_argument("hole intervals must be pairwise disjoint");
    }
}

double Hole::measure() const { return total_length(intervals_); }

double Hole::max_length() const
{
    double h = 0.0;
    for (const auto& iv : intervals_)
        h = std::max(h, iv.length());
    return h;
}

bool Hole::contains(double x) const { return component(x) >= 0; }

int Hole::component(double x) const
{
    for (std::size_t i = 0; i < intervals_.size(); ++i)
        if (intervals_[i].contains_open(x))
            return static_cast<int>(i);
    return -1;
}

// ---------------------------------------------------------------- open system

OpenSystem::OpenSystem(PiecewiseExpandingMap map, Hole hole) : map_(std::move(map)), hole_(std::move(hole))
{
    for (int b = 0; b < map_.branch_count(); ++b) {
        const Interval dom = map_.branch(b).domain;
        double start = dom.lo;
        for (const auto& h : hole_.intervals()) {
            if (h.hi <= start || h.lo >= dom.hi)
                continue;
            if (h.lo > start && std::min(h.lo, dom.hi) - start > kGeoEps)
                q_.push_back({{start, std::min(h.lo, dom.hi)}, b});
            start = std::max(start, h.hi);
        }
        if (dom.hi - start > kGeoEps)
            q_.push_back({{start, dom.hi}, b});
    }
    if (q_.empty())
        throw DegenerateSystemError("the hole leaves no surviving interval of positive length");

    d_ = INFINITY;
    for (const auto& e : q_) {
        d_ = std::min(d_, e.interval.length());
        D_len_ = std::max(D_len_, e.interval.length());
    }

    std::vector<double> pts{0.0, 1.0};
    for (const auto& e : q_) {
        pts.push_back(e.interval.lo);
        pts.push_back(e.interval.hi);
    }
    for (const auto& h : hole_.intervals()) {
        pts.push_back(h.lo);
        pts.push_back(h.hi);
    }
    std::sort(pts.begin(), pts.end());
    for (double p : pts)
        if (cuts_.empty() || p - cuts_.back() > kGeoEps)
            cuts_.push_back(p);
    for (std::size_t s = 0; s + 1 < cuts_.size(); ++s) {
        const double mid = 0.5 * (cuts_[s] + cuts_[s + 1]);
        const int h = hole_.component(mid);
        if (h >= 0) {
            atom_kind_.push_back(-(h + 1));
        } else {
            int k = q_index(mid);
            if (k < 0) {
                // Sliver between a dropped piece and a hole; attach it to the nearest Q element.
                double best = INFINITY;
                for (int j = 0; j < K(); ++j) {
                    const double dist = std::min(std::abs(q_[j].interval.lo - mid), std::abs(q_[j].interval.hi - mid));
                    if (dist < best) {
                        best = dist;
                        k = j;
                    }
                }
            }
            atom_kind_.push_back(k);
        }
    }
}

double OpenSystem::surviving_measure() const
{
    double s = 0.0;
    for (const auto& e : q_)
        s += e.interval.length();
    return s;
}

std::vector<Interval> OpenSystem::surviving_set() const
{
    std::vector<Interval> v;
    for (const auto& e : q_)
        v.push_back(e.interval);
    return merge_intervals(v, 0.0);
}

int OpenSystem::q_index(double x) const
{
    for (int k = 0; k < K(); ++k)
        if (q_[k].interval.contains(x, 0.0))
            return k;
    if (hole_.contains(x))
        return -1;
    for (int k = 0; k < K(); ++k)
        if (q_[k].interval.contains(x))
            return k;
    return -1;
}

std::vector<ImagePiece> OpenSystem::decompose(const Interval& image) const
{
    std::vector<double> pts{image.lo};
    for (double c : cuts_)
        if (c > image.lo + kGeoEps && c < image.hi - kGeoEps)
            pts.push_back(c);
    pts.push_back(image.hi);

    std::vector<ImagePiece> out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Interval span{pts[i], pts[i + 1]};
        const double mid = span.mid();
        auto it = std::upper_bound(cuts_.begin(), cuts_.end(), mid);
        std::size_t seg = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - cuts_.begin()) - 1));
        seg = std::min(seg, atom_kind_.size() - 1);
        const int kind = atom_kind_[seg];
        if (kind < 0) {
            out.push_back({span, ImagePiece::Kind::InHole, -kind - 1});
        } else {
            const Interval& q = q_[kind].interval;
            const bool full = std::abs(span.lo - q.lo) <= kGeoEps && std::abs(span.hi - q.hi) <= kGeoEps;
            out.push_back({span, full ? ImagePiece::Kind::Covers : ImagePiece::Kind::Partial, kind});
        }
    }
    return out;
}

OpenSystem build_open_system(PiecewiseExpandingMap map, Hole hole)
{
    return OpenSystem(std::move(map), std::move(hole));
}

double distortion_constant(double holder_const, double mu, double alpha)
{
    if (!(mu > 2.0) || !(alpha > 0.0))
        throw std::invalid_argument("distortion constant needs mu > 2 and alpha > 0");
    return std::expm1(holder_const / (mu * (std::pow(mu, alpha) - 1.0)));
}

double distortion_constant(const PiecewiseExpandingMap& map)
{
    return distortion_constant(map.holder_const(), map.mu(), map.alpha());
}

double survivor_measure(const OpenSystem& system, int n, int grid)
{
    if (n < 0)
        throw std::invalid_argument("survivor_measure needs n >= 0");
    if (grid < 1)
        throw std::invalid_argument("survivor_measure needs grid >= 1");
    const auto& map = system.map();
    const auto& hole = system.hole();
    long count = 0;
    for (int i = 0; i < grid; ++i) {
        double x = (i + 0.5) / grid;
        bool alive = !hole.contains(x);
        for (int s = 0; alive && s < n; ++s) {
            x = map.evaluate(x).image;
            alive = !hole.contains(x);
        }
        count += alive;
    }
    return static_cast<double>(count) / grid;
}

} // namespace accim
