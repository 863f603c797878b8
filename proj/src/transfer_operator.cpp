#include "accim/transfer_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "accim/errors.hpp"
#include "accim/parallel.hpp"
#include "accim/quadrature.hpp"

namespace accim {

// ---------------------------------------------------------------- grid

TowerGrid::TowerGrid(std::shared_ptr<const Tower> tower, int samples_per_cell)
    : tower_(std::move(tower)), g_(samples_per_cell)
{
    if (g_ < 2)
        throw std::invalid_argument("need at least two samples per cell");
    const auto& t = *tower_;
    const std::size_t n = t.cells().size() * static_cast<std::size_t>(g_);
    y_.resize(n);
    z_.resize(n);
    dpi_.resize(n);
    w_.assign(n, 0.0);
    for (const auto& c : t.cells()) {
        const std::size_t o = offset(c.id);
        const double h = c.projected.length() / (g_ - 1);
        for (int s = 0; s < g_; ++s) {
            const double y = s + 1 == g_ ? c.projected.hi : c.projected.lo + s * h;
            y_[o + s] = y;
            dpi_[o + s] = t.pi_derivative(c.id, y);
        }
        // z at the nodes: accumulate the per-interval integrals of 1/pi'
        std::vector<double> inc(g_ - 1);
        for (int s = 0; s + 1 < g_; ++s) {
            const double a = y_[o + s], b = y_[o + s + 1];
            for (int i = 0; i < 5; ++i) {
                const double u = 0.5 * (a + b) + 0.5 * (b - a) * kGaussNodes[i];
                const double t_lin = (u - a) / (b - a);
                const double wq = 0.5 * (b - a) * kGaussWeights[i] / t.pi_derivative(c.id, u);
                inc[s] += wq;
                w_[o + s] += wq * (1.0 - t_lin);
                w_[o + s + 1] += wq * t_lin;
            }
        }
        if (c.orientation > 0) {
            z_[o] = 0.0;
            for (int s = 0; s + 1 < g_; ++s)
                z_[o + s + 1] = z_[o + s] + inc[s];
        } else {
            z_[o + g_ - 1] = 0.0;
            for (int s = g_ - 1; s-- > 0;)
                z_[o + s] = z_[o + s + 1] + inc[s];
        }
    }
}

double TowerGrid::interpolate(std::span<const double> values, int cell, double y) const
{
    const auto& c = tower_->cell(cell);
    const double h = c.projected.length() / (g_ - 1);
    const double u = (y - c.projected.lo) / h;
    int k = std::clamp(static_cast<int>(std::floor(u)), 0, g_ - 2);
    const double t = std::clamp(u - k, 0.0, 1.0);
    const std::size_t o = offset(cell);
    return (1.0 - t) * values[o + k] + t * values[o + k + 1];
}

// ---------------------------------------------------------------- density

TowerDensity::TowerDensity(std::shared_ptr<const TowerGrid> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values))
{
    if (values_.size() != grid_->size())
        throw std::invalid_argument("density size does not match the tower grid");
}

TowerDensity TowerDensity::constant(std::shared_ptr<const TowerGrid> grid, double c)
{
    const std::size_t n = grid->size();
    return TowerDensity(std::move(grid), std::vector<double>(n, c));
}

double TowerDensity::integral() const
{
    double s = 0.0;
    const auto& w = grid_->weights();
    for (std::size_t i = 0; i < values_.size(); ++i)
        s += w[i] * values_[i];
    return s;
}

double TowerDensity::l1() const
{
    double s = 0.0;
    const auto& w = grid_->weights();
    for (std::size_t i = 0; i < values_.size(); ++i)
        s += w[i] * std::abs(values_[i]);
    return s;
}

// ---------------------------------------------------------------- operator

TransferOperator::TransferOperator(std::shared_ptr<const Tower> tower, int samples_per_cell, int workers)
    : grid_(std::make_shared<TowerGrid>(std::move(tower), samples_per_cell)), workers_(workers)
{
    const auto& grid = *grid_;
    const auto& t = grid.tower();
    const auto& map = t.system().map();
    const int g = grid.g();

    // Entry (i,j) is (1/w_i) * integral over the source cell of hat_j * (hat_i o F) dm, i.e. the
    // lumped-mass projection of P hat_j onto the target hats. Column sums weighted by w_i then equal
    // the surviving mass of hat_j exactly.
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(grid.size());
    auto node_of = [&](int cell, double y) {
        const auto& c = t.cell(cell);
        const double h = c.projected.length() / (g - 1);
        const int k = std::clamp(static_cast<int>(std::floor((y - c.projected.lo) / h)), 0, g - 2);
        return std::pair{k, std::clamp((y - c.projected.lo) / h - k, 0.0, 1.0)};
    };

    std::vector<int> base_cell(t.N(), -1);
    for (const auto& c : t.cells())
        if (c.level == 0)
            base_cell[c.base] = c.id;

    for (const auto& c : t.cells()) {
        const auto& br = map.branch(c.branch(t.system()));
        const std::size_t src = grid.offset(c.id);
        for (const auto& p : c.pieces) {
            if (p.fate != PieceFate::Continue && p.fate != PieceFate::Return)
                continue;
            const int target = p.fate == PieceFate::Continue ? p.target : base_cell[p.target];
            const std::size_t dst = grid.offset(target);
            std::vector<double> cuts{p.span.lo, p.span.hi};
            for (int k = 0; k < g; ++k) {
                const double y = grid.y(c.id, k);
                if (y > p.span.lo && y < p.span.hi)
                    cuts.push_back(y);
                const double u = br.inverse(grid.y(target, k));
                if (u > p.span.lo && u < p.span.hi)
                    cuts.push_back(u);
            }
            std::sort(cuts.begin(), cuts.end());
            for (std::size_t m = 0; m + 1 < cuts.size(); ++m) {
                const double a = cuts[m], b = cuts[m + 1];
                if (b - a <= 0.0)
                    continue;
                const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
                for (int q = 0; q < 5; ++q) {
                    const double u = mid + half * kGaussNodes[q];
                    const double wq = half * kGaussWeights[q] / t.pi_derivative(c.id, u);
                    const auto [ks, ts] = node_of(c.id, u);
                    const auto [kt, tt] = node_of(target, std::clamp(br.value(u), p.image.lo, p.image.hi));
                    const double hs[2] = {1.0 - ts, ts};
                    const double ht[2] = {1.0 - tt, tt};
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j)
                            rows[dst + kt + i].push_back({src + ks + j, wq * ht[i] * hs[j]});
                }
            }
        }
    }

    row_ptr_.push_back(0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& r = rows[i];
        std::stable_sort(r.begin(), r.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        const double inv_w = 1.0 / grid.weight(i);
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (r[k].second == 0.0)
                continue;
            if (row_ptr_.back() < col_.size() && col_.back() == r[k].first)
                val_.back() += r[k].second * inv_w;
            else {
                col_.push_back(r[k].first);
                val_.push_back(r[k].second * inv_w);
            }
        }
        row_ptr_.push_back(col_.size());
    }
}

TowerDensity TransferOperator::apply(const TowerDensity& f) const
{
    if (f.grid_ptr().get() != grid_.get() && f.values().size() != grid_->size())
        throw std::invalid_argument("density lives on a different tower grid");
    std::vector<double> out(grid_->size(), 0.0);
    const auto& x = f.values();
    parallel_for(out.size(), workers_, [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            s += val_[k] * x[col_[k]];
        out[i] = s;
    });
    return TowerDensity(grid_, std::move(out));
}

TowerDensity TransferOperator::uniform() const
{
    auto f = TowerDensity::constant(grid_, 1.0);
    return normalize(f);
}

double TransferOperator::surviving_mass(const TowerDensity& f) const
{
    const auto& t = grid_->tower();
    const int g = grid_->g();
    double total = 0.0;
    for (const auto& c : t.cells()) {
        const double h = c.projected.length() / (g - 1);
        for (const auto& p : c.pieces) {
            if (p.fate == PieceFate::Hole || p.fate == PieceFate::Truncated)
                continue;
            // split the span at sample nodes so the integrand is smooth on each panel
            const int k0 = std::clamp(static_cast<int>(std::floor((p.span.lo - c.projected.lo) / h)), 0, g - 2);
            const int k1 = std::clamp(static_cast<int>(std::ceil((p.span.hi - c.projected.lo) / h)), 1, g - 1);
            for (int k = k0; k < k1; ++k) {
                const double a = std::max(p.span.lo, grid_->y(c.id, k));
                const double b = std::min(p.span.hi, grid_->y(c.id, k + 1));
                if (b <= a)
                    continue;
                total += gauss5([&](double y) {
                    return grid_->interpolate(f.values(), c.id, y) / t.pi_derivative(c.id, y);
                }, a, b);
            }
        }
    }
    return total;
}

TowerDensity apply_P(const TransferOperator& op, const TowerDensity& f) { return op.apply(f); }

TowerDensity normalize(const TowerDensity& f)
{
    const double m = f.l1();
    if (!(m > 0.0))
        throw TotalEscapeError("density has zero mass: all mass escaped");
    std::vector<double> v = f.values();
    for (auto& x : v)
        x /= m;
    return TowerDensity(f.grid_ptr(), std::move(v));
}

FixedPointResult fixed_point(const TransferOperator& op, const TowerDensity& f0, double tol, int max_iter)
{
    FixedPointResult r;
    TowerDensity f = normalize(f0);
    double prev_mass = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        TowerDensity pf = op.apply(f);
        const double mass = pf.l1();
        if (!(mass > 0.0))
            throw TotalEscapeError("all mass escaped during iteration");
        auto& v = pf.values();
        for (auto& x : v)
            x /= mass;
        double res = 0.0;
        const auto& w = op.grid().weights();
        for (std::size_t i = 0; i < v.size(); ++i)
            res += w[i] * std::abs(v[i] - f.values()[i]);
        r.iterations = it;
        r.residual = res;
        r.lambda = mass;
        r.mass_ratio_gap = it > 1 ? std::abs(mass - prev_mass) : mass;
        prev_mass = mass;
        f = std::move(pf);
        if (res <= tol) {
            r.converged = true;
            break;
        }
    }
    r.lambda = op.apply(f).l1();
    r.phi = std::move(f);
    return r;
}

FixedPointResult fixed_point(const TransferOperator& op, double tol, int max_iter)
{
    return fixed_point(op, op.uniform(), tol, max_iter);
}

// ---------------------------------------------------------------- norms

DensityNorms norms_on_levels(const TowerDensity& f, double xi, double alpha, int min_level, int max_level)
{
    DensityNorms n;
    const auto& grid = f.grid();
    const auto& t = grid.tower();
    const int g = grid.g();
    for (const auto& c : t.cells()) {
        if (c.level < min_level || c.level > max_level)
            continue;
        const double wl = std::exp(-xi * c.level);
        const auto v = f.cell(c.id);
        double sup = 0.0;
        for (int s = 0; s < g; ++s)
            sup = std::max(sup, std::abs(v[s]));
        n.sup = std::max(n.sup, wl * sup);

        double r = 0.0;
        if (alpha == 1.0) {
            for (int s = 0; s + 1 < g; ++s) {
                const double dz = std::abs(grid.z(c.id, s + 1) - grid.z(c.id, s));
                if (dz <= 0.0)
                    continue;
                const double d = std::abs(v[s + 1] - v[s]) / dz;
                if (v[s] != 0.0)
                    r = std::max(r, d / std::abs(v[s]));
                if (v[s + 1] != 0.0)
                    r = std::max(r, d / std::abs(v[s + 1]));
            }
        } else {
            for (int s = 0; s < g; ++s) {
                if (v[s] == 0.0)
                    continue;
                for (int u = 0; u < g; ++u) {
                    if (u == s)
                        continue;
                    const double dz = std::abs(grid.z(c.id, u) - grid.z(c.id, s));
                    if (dz <= 0.0)
                        continue;
                    r = std::max(r, std::abs(v[s] - v[u]) / (std::pow(dz, alpha) * std::abs(v[s])));
                }
            }
        }
        n.holder = std::max(n.holder, wl * r);
    }
    n.norm = std::max(n.sup, n.holder);
    return n;
}

DensityNorms norms(const TowerDensity& f, double xi, double alpha)
{
    return norms_on_levels(f, xi, alpha, 0, std::numeric_limits<int>::max());
}

} // namespace accim
