#include "accim/tower.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "accim/errors.hpp"
#include "accim/quadrature.hpp"

namespace accim {

double choose_delta(const OpenSystem& system, double margin)
{
    const auto& map = system.map();
    const double d = system.d();
    if (map.alpha() == 1.0)
        return d;
    const double alpha = map.alpha(), mu = map.mu();
    const double ct = distortion_constant(map);
    // 2^a (1 + C~ (2 delta)^a) / mu^a < 1 - margin  <=>  (2 delta)^a < ((1-margin)(mu/2)^a - 1)/C~
    const double slack = (1.0 - margin) * std::pow(mu / 2.0, alpha) - 1.0;
    if (slack <= 0.0)
        throw HypothesisFailure("no admissible delta: 2^alpha/mu^alpha is too close to 1");
    if (ct == 0.0)
        return d;
    const double dmax = 0.5 * std::pow(slack / ct, 1.0 / alpha) * (1.0 - 1e-12);
    return std::min(d, dmax);
}

std::vector<Interval> build_bases(const OpenSystem& system, double delta)
{
    if (!(delta > 0.0))
        throw std::invalid_argument("delta must be positive");
    std::vector<Interval> bases;
    for (const auto& e : system.partition()) {
        const double len = e.interval.length();
        if (len < delta * (1.0 - 1e-12))
            throw HypothesisFailure("an interval of Q is shorter than delta");
        const int n = len > 2.0 * delta ? static_cast<int>(std::ceil(len / (2.0 * delta))) : 1;
        for (int k = 0; k < n; ++k) {
            const double lo = k == 0 ? e.interval.lo : e.interval.lo + len * k / n;
            const double hi = k + 1 == n ? e.interval.hi : e.interval.lo + len * (k + 1) / n;
            bases.push_back({lo, hi});
        }
    }
    return bases;
}

// ---------------------------------------------------------------- cell geometry

double Tower::base_preimage(int id, double y) const
{
    const auto& c = cells_[id];
    const auto& map = system_.map();
    for (auto it = c.itinerary.rbegin(); it != c.itinerary.rend(); ++it)
        y = map.branch(*it).inverse(y);
    return y;
}

double Tower::pi_derivative(int id, double y) const
{
    const auto& c = cells_[id];
    const auto& map = system_.map();
    double j = bases_[c.base].length();
    for (auto it = c.itinerary.rbegin(); it != c.itinerary.rend(); ++it) {
        const auto& br = map.branch(*it);
        y = br.inverse(y);
        j *= std::abs(br.derivative(y));
    }
    return j;
}

double Tower::z_offset(int id, double y) const
{
    const auto& c = cells_[id];
    const double h = c.projected.length() / kZTableIntervals;
    int k = static_cast<int>(std::floor((y - c.projected.lo) / h));
    k = std::clamp(k, 0, kZTableIntervals - 1);
    const double yk = c.projected.lo + k * h;
    const double part = gauss5([&](double u) { return 1.0 / pi_derivative(id, u); }, yk, y);
    return c.orientation > 0 ? c.z_table[k] + part : c.z_table[k] - part;
}

double Tower::project(const TowerPoint& p) const
{
    if (p.cell < 0 || p.cell >= static_cast<int>(cells_.size()))
        throw DomainError("no such tower cell");
    const auto& c = cells_[p.cell];
    const double tol = 1e-12 * std::max(1.0, c.measure);
    if (!(p.offset >= -tol && p.offset <= c.measure + tol))
        throw DomainError("tower point outside its cell");
    const double t = std::clamp(p.offset, 0.0, c.measure);
    if (c.level == 0)
        return std::min(c.projected.lo + t * bases_[c.base].length(), c.projected.hi);

    // locate the z-table interval, start from the cubic Hermite interpolant of y(z), then Newton
    const auto& z = c.z_table;
    int k = 0;
    for (k = 0; k < kZTableIntervals - 1; ++k) {
        const bool inside = c.orientation > 0 ? t <= z[k + 1] : t >= z[k + 1];
        if (inside)
            break;
    }
    const double h = c.projected.length() / kZTableIntervals;
    double a = c.projected.lo + k * h, b = (k + 1 == kZTableIntervals) ? c.projected.hi : a + h;
    const double dz = z[k + 1] - z[k];
    double y = a;
    if (dz != 0.0) {
        const double s = (t - z[k]) / dz, s2 = s * s, s3 = s2 * s;
        const double m0 = dz / c.z_slope[k], m1 = dz / c.z_slope[k + 1];
        y = (2 * s3 - 3 * s2 + 1) * a + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * b + (s3 - s2) * m1;
    }
    y = std::clamp(y, a, b);
    // Newton is quadratic here with a small constant (the distortion over one table interval), so a
    // step below 1e-8 of the interval leaves an error far below rounding
    const double ytol = 1e-8 * (b - a);
    for (int it = 0; it < 50; ++it) {
        const double f = z_offset(p.cell, y) - t;
        const double fp = c.orientation / pi_derivative(p.cell, y);
        const double yn = std::clamp(y - f / fp, a, b);
        const bool done = std::abs(yn - y) <= ytol;
        y = yn;
        if (done)
            break;
    }
    return y;
}

double Tower::return_derivative(int id, int base, double y) const
{
    const auto& c = cells_[id];
    const auto& br = system_.map().branch(c.branch(system_));
    return std::abs(br.derivative(y)) * pi_derivative(id, y) / bases_[base].length();
}

std::optional<TowerPoint> Tower::apply(const TowerPoint& p) const
{
    const auto& c = cells_[p.cell];
    if (c.pieces.empty())
        return std::nullopt;
    // half-open lookup; deep cells have tower measures far below any absolute tolerance
    auto it = std::upper_bound(c.pieces.begin(), c.pieces.end(), p.offset,
                               [](double z, const CellPiece& q) { return z < q.z_end; });
    if (it == c.pieces.end())
        --it;
    const auto& piece = *it;
    switch (piece.fate) {
    case PieceFate::Continue:
        return TowerPoint{piece.target, std::clamp(p.offset - piece.z_begin, 0.0, cells_[piece.target].measure)};
    case PieceFate::Return: {
        const double y = std::clamp(project(p), piece.span.lo, piece.span.hi);
        const double x = std::clamp(system_.map().branch(c.branch(system_)).value(y), 0.0, 1.0);
        const auto& lam = bases_[piece.target];
        const double u = (x - lam.lo) / lam.length();
        if (u < -1e-9 || u > 1.0 + 1e-9)
            throw std::logic_error("return piece does not map onto its base");
        return TowerPoint{piece.target, std::clamp(u, 0.0, 1.0)};
    }
    default:
        return std::nullopt;
    }
}

double project(const Tower& tower, int cell, double offset) { return tower.project({cell, offset}); }

// ---------------------------------------------------------------- construction

namespace {

void fill_z_table(const Tower& t, TowerCell& c)
{
    const int n = Tower::kZTableIntervals;
    const double h = c.projected.length() / n;
    std::vector<double> inc(n);
    for (int k = 0; k < n; ++k) {
        const double a = c.projected.lo + k * h;
        const double b = k + 1 == n ? c.projected.hi : a + h;
        inc[k] = gauss5([&](double u) { return 1.0 / t.pi_derivative(c.id, u); }, a, b);
    }
    c.z_slope.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double y = k == n ? c.projected.hi : c.projected.lo + k * h;
        c.z_slope[k] = c.orientation / t.pi_derivative(c.id, y);
    }
    c.z_table.assign(n + 1, 0.0);
    if (c.orientation > 0) {
        for (int k = 0; k < n; ++k)
            c.z_table[k + 1] = c.z_table[k] + inc[k];
        c.measure = c.z_table[n];
    } else {
        for (int k = n; k-- > 0;)
            c.z_table[k] = c.z_table[k + 1] + inc[k];
        c.measure = c.z_table[0];
    }
}

} // namespace

Tower build_tower(const OpenSystem& system, double delta, const TowerOptions& options)
{
    Tower t(system);
    t.delta_ = delta;
    t.bases_ = build_bases(system, delta);
    t.hole_bound_ok_ = hole_bound_holds(system, delta);
    if (!t.hole_bound_ok_ && options.enforce_hole_bound)
        throw HypothesisFailure("hole component longer than delta(mu-2)/2");

    const auto& map = system.map();
    const double m_i = system.surviving_measure();

    // bases contained in each Q element, for splitting returns
    std::vector<std::vector<int>> bases_in_q(system.K());
    for (int i = 0; i < t.N(); ++i)
        bases_in_q[system.q_index(t.bases_[i].mid())].push_back(i);

    std::vector<int> current;
    for (int i = 0; i < t.N(); ++i) {
        TowerCell c;
        c.id = i;
        c.base = i;
        c.index = 0;
        c.q = system.q_index(t.bases_[i].mid());
        c.projected = t.bases_[i];
        t.cells_.push_back(c);
        fill_z_table(t, t.cells_.back());
        current.push_back(i);
    }
    t.level_mass_.push_back(0.0);
    for (int id : current)
        t.level_mass_[0] += t.cells_[id].measure;

    int l_max = options.l_max;
    for (int level = 0; !current.empty(); ++level) {
        std::vector<int> children; // parent of every continuing piece
        double child_interval_mass = 0.0;

        for (int id : current) {
            TowerCell& c = t.cells_[id];
            const int b = c.branch(system);
            const auto& br = map.branch(b);
            const bool inc = br.increasing();
            const auto parts = system.decompose(br.image(c.projected));

            // image pieces, returns split at base boundaries
            struct Img {
                Interval span;
                PieceFate fate;
                int target;
                int q;
            };
            std::vector<Img> imgs;
            for (const auto& p : parts) {
                if (p.kind == ImagePiece::Kind::InHole) {
                    imgs.push_back({p.span, PieceFate::Hole, p.index, -1});
                } else if (p.kind == ImagePiece::Kind::Partial) {
                    imgs.push_back({p.span, PieceFate::Continue, -1, p.index});
                } else {
                    const auto& inside = bases_in_q[p.index];
                    double lo = p.span.lo;
                    for (std::size_t j = 0; j < inside.size(); ++j) {
                        const double hi = j + 1 == inside.size() ? p.span.hi : t.bases_[inside[j]].hi;
                        imgs.push_back({{lo, hi}, PieceFate::Return, inside[j], p.index});
                        lo = hi;
                    }
                }
            }

            // projected cut points, ascending in y
            const std::size_t m = imgs.size();
            std::vector<double> ys(m + 1);
            for (std::size_t i = 1; i < m; ++i)
                ys[i] = br.inverse(imgs[i].span.lo);
            ys[0] = inc ? c.projected.lo : c.projected.hi;
            ys[m] = inc ? c.projected.hi : c.projected.lo;
            std::vector<double> zs(m + 1);
            for (std::size_t i = 0; i <= m; ++i) {
                const bool at_start = (i == 0) == (inc == (c.orientation > 0));
                if (i == 0 || i == m)
                    zs[i] = at_start ? 0.0 : c.measure;
                else
                    zs[i] = t.z_offset(id, ys[i]);
            }

            c.pieces.clear();
            for (std::size_t i = 0; i < m; ++i) {
                CellPiece piece;
                piece.span = {std::min(ys[i], ys[i + 1]), std::max(ys[i], ys[i + 1])};
                piece.fate = imgs[i].fate;
                piece.image = imgs[i].span;
                piece.target = imgs[i].target;
                piece.z_begin = std::min(zs[i], zs[i + 1]);
                piece.z_end = std::max(zs[i], zs[i + 1]);
                const double zlen = piece.z_end - piece.z_begin;
                if (piece.fate == PieceFate::Return) {
                    piece.min_derivative = INFINITY;
                    for (int s = 0; s <= 8; ++s) {
                        const double y = piece.span.lo + piece.span.length() * s / 8.0;
                        const double fd = t.return_derivative(id, piece.target, y);
                        piece.min_derivative = std::min(piece.min_derivative, fd);
                        piece.max_derivative = std::max(piece.max_derivative, fd);
                    }
                } else if (piece.fate == PieceFate::Hole) {
                    TowerHole h;
                    h.base = c.base;
                    h.level = level + 1;
                    h.cell = id;
                    h.component = piece.target;
                    h.span = piece.span;
                    h.measure = zlen;
                    t.holes_.push_back(h);
                    if (static_cast<int>(t.hole_mass_.size()) <= level + 1)
                        t.hole_mass_.resize(level + 2, 0.0);
                    t.hole_mass_[level + 1] += zlen;
                } else {
                    children.push_back(id);
                    child_interval_mass += zlen * t.bases_[c.base].length();
                }
                c.pieces.push_back(piece);
            }
            // keep pieces ordered by tower offset
            std::sort(c.pieces.begin(), c.pieces.end(),
                      [](const CellPiece& a, const CellPiece& b) { return a.z_begin < b.z_begin; });
        }

        if (children.empty())
            break;
        const bool small = child_interval_mass < options.tail_tolerance * m_i;
        if (level + 1 > l_max || (small && options.stop_early)) {
            if (small || level + 1 > options.level_cap) {
                for (int id : current)
                    for (auto& piece : t.cells_[id].pieces)
                        if (piece.fate == PieceFate::Continue)
                            piece.fate = PieceFate::Truncated;
                t.tail_mass_ = child_interval_mass;
                t.tail_converged_ = small;
                l_max = std::min(l_max, level);
                break;
            }
            l_max = level + 1;
        }

        // create the next level
        std::vector<int> next;
        std::vector<int> per_base(t.N(), 0);
        t.level_mass_.push_back(0.0);
        for (int id : current) {
            const std::size_t npieces = t.cells_[id].pieces.size();
            for (std::size_t k = 0; k < npieces; ++k) {
                const CellPiece piece = t.cells_[id].pieces[k];
                if (piece.fate != PieceFate::Continue)
                    continue;
                const TowerCell& parent = t.cells_[id];
                const int b = parent.branch(system);
                TowerCell c;
                c.id = static_cast<int>(t.cells_.size());
                c.base = parent.base;
                c.level = level + 1;
                c.index = per_base[c.base]++;
                c.parent = id;
                c.orientation = parent.orientation * (map.branch(b).increasing() ? 1 : -1);
                c.itinerary = parent.itinerary;
                c.itinerary.push_back(b);
                c.projected = piece.image;
                c.q = system.q_index(piece.image.mid());
                t.cells_[id].pieces[k].target = c.id;
                t.cells_.push_back(std::move(c));
                fill_z_table(t, t.cells_.back());
                t.level_mass_.back() += t.cells_.back().measure;
                next.push_back(t.cells_.back().id);
            }
        }
        if (t.cells_.size() > options.max_cells)
            throw std::runtime_error("tower exceeded the cell limit");
        current = std::move(next);
    }
    t.l_max_ = l_max;
    if (static_cast<int>(t.hole_mass_.size()) < 1)
        t.hole_mass_.resize(1, 0.0);
    return t;
}

} // namespace accim
