#include "accim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "accim/errors.hpp"
#include "accim/parallel.hpp"

namespace accim {

namespace {

constexpr int kBuckets = 4096;

int bucket_of(double x) { return std::clamp(static_cast<int>(std::floor(x * kBuckets)), 0, kBuckets - 1); }

} // namespace

// ---------------------------------------------------------------- projected density

ProjectedDensity::ProjectedDensity(TowerDensity phi) : phi_(std::move(phi))
{
    const auto& grid = phi_.grid();
    const auto& t = grid.tower();
    const int n = grid.cell_count();
    const int g = grid.g();
    node_cum_.assign(n, std::vector<double>(g, 0.0));
    cell_total_.assign(n, 0.0);
    buckets_.assign(kBuckets, {});
    for (const auto& c : t.cells()) {
        auto& cum = node_cum_[c.id];
        for (int k = 0; k + 1 < g; ++k)
            cum[k + 1] = cum[k] + gauss5([&](double y) { return cell_density(c.id, y); }, grid.y(c.id, k),
                                         grid.y(c.id, k + 1));
        cell_total_[c.id] = cum.back();
        for (int b = bucket_of(c.projected.lo); b <= bucket_of(c.projected.hi); ++b)
            buckets_[b].push_back(c.id);
    }
    by_hi_.resize(n);
    for (int i = 0; i < n; ++i)
        by_hi_[i] = i;
    std::stable_sort(by_hi_.begin(), by_hi_.end(),
                     [&](int a, int b) { return t.cell(a).projected.hi < t.cell(b).projected.hi; });
    hi_sorted_.resize(n);
    prefix_.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        hi_sorted_[i] = t.cell(by_hi_[i]).projected.hi;
        prefix_[i + 1] = prefix_[i] + cell_total_[by_hi_[i]];
    }
    const double total = prefix_.back();
    if (!(total > 0.0))
        throw TotalEscapeError("projected density has zero mass");
    scale_ = 1.0 / total;
}

// unscaled phi/pi' at projected point y of `cell`
double ProjectedDensity::cell_density(int cell, double y) const
{
    const auto& grid = phi_.grid();
    return grid.interpolate(phi_.values(), cell, y) / grid.tower().pi_derivative(cell, y);
}

double ProjectedDensity::cell_partial(int cell, double x) const
{
    const auto& grid = phi_.grid();
    const auto& c = grid.tower().cell(cell);
    if (x <= c.projected.lo)
        return 0.0;
    if (x >= c.projected.hi)
        return cell_total_[cell];
    const int g = grid.g();
    const double h = c.projected.length() / (g - 1);
    const int k = std::clamp(static_cast<int>(std::floor((x - c.projected.lo) / h)), 0, g - 2);
    const double a = grid.y(cell, k), b = grid.y(cell, k + 1);
    if (x <= a)
        return node_cum_[cell][k];
    // cubic Hermite through the cumulative integral, slopes are the density at the nodes
    const std::size_t o = grid.offset(cell);
    const double w = b - a;
    const double t = (x - a) / w;
    const double m0 = phi_.values()[o + k] / grid.pi_derivative(cell, k);
    const double m1 = phi_.values()[o + k + 1] / grid.pi_derivative(cell, k + 1);
    const double c0 = node_cum_[cell][k], c1 = node_cum_[cell][k + 1];
    const double t2 = t * t, t3 = t2 * t;
    return c0 * (2 * t3 - 3 * t2 + 1) + w * m0 * (t3 - 2 * t2 + t) + c1 * (-2 * t3 + 3 * t2) + w * m1 * (t3 - t2);
}

double ProjectedDensity::cdf(double x) const
{
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    const auto j = std::upper_bound(hi_sorted_.begin(), hi_sorted_.end(), x) - hi_sorted_.begin();
    double s = prefix_[j];
    const auto& t = phi_.grid().tower();
    for (int id : buckets_[bucket_of(x)]) {
        const auto& p = t.cell(id).projected;
        if (p.lo < x && x < p.hi)
            s += cell_partial(id, x);
    }
    return s * scale_;
}

double ProjectedDensity::mass(double a, double b) const
{
    if (b <= a)
        return 0.0;
    return cdf(b) - cdf(a);
}

double ProjectedDensity::value(double x) const
{
    const auto& t = phi_.grid().tower();
    double s = 0.0;
    for (int id : buckets_[bucket_of(x)]) {
        const auto& p = t.cell(id).projected;
        if (p.lo <= x && (x < p.hi || (x == p.hi && p.hi >= 1.0)))
            s += cell_density(id, x);
    }
    return s * scale_;
}

std::vector<double> ProjectedDensity::breakpoints() const
{
    const auto& t = phi_.grid().tower();
    std::vector<double> out;
    out.reserve(2 * t.cells().size());
    for (const auto& c : t.cells()) {
        out.push_back(c.projected.lo);
        out.push_back(c.projected.hi);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int ProjectedDensity::max_overlap(int level) const
{
    const auto& t = phi_.grid().tower();
    std::vector<std::vector<std::pair<double, int>>> events(t.N());
    for (const auto& c : t.cells()) {
        if (c.level != level)
            continue;
        // shrink slightly so cells that only share an endpoint do not count as overlapping
        events[c.base].push_back({c.projected.lo + kGeoEps, +1});
        events[c.base].push_back({c.projected.hi - kGeoEps, -1});
    }
    int best = 0;
    for (auto& ev : events) {
        std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
            return a.first < b.first || (a.first == b.first && a.second < b.second);
        });
        int cur = 0;
        for (const auto& e : ev) {
            cur += e.second;
            best = std::max(best, cur);
        }
    }
    return best;
}

// ---------------------------------------------------------------- interval quantities

AccimResult project_density(const TowerDensity& phi, int grid)
{
    if (grid < 1)
        throw std::invalid_argument("output grid must have at least one bin");
    AccimResult r;
    auto dens = std::make_shared<ProjectedDensity>(phi);
    const auto& system = phi.grid().tower().system();
    r.edges = uniform_edges(grid);
    r.psi.resize(grid);
    std::vector<double> point(grid, 0.0);
    r.sup_psi = 0.0;
    r.inf_psi = std::numeric_limits<double>::infinity();
    double lo_cdf = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double hi_cdf = dens->cdf(r.edges[i + 1]);
        r.psi[i] = (hi_cdf - lo_cdf) / (r.edges[i + 1] - r.edges[i]);
        lo_cdf = hi_cdf;
        const double mid = 0.5 * (r.edges[i] + r.edges[i + 1]);
        if (system.q_index(mid) < 0)
            continue;
        point[i] = dens->value(mid);
        r.sup_psi = std::max(r.sup_psi, point[i]);
        r.inf_psi = std::min(r.inf_psi, point[i]);
    }
    if (!std::isfinite(r.inf_psi))
        r.inf_psi = 0.0;
    if (system.map().alpha() == 1.0) {
        double v = 0.0;
        for (int i = 0; i + 1 < grid; ++i)
            v += std::abs(point[i + 1] - point[i]);
        r.variation = v;
    }
    r.density = std::move(dens);
    return r;
}

namespace {

// nu(T_b^{-1} J) for the branch b and an interval J of [0,1]
double preimage_mass(const Branch& br, const IntervalDensity& psi, const Interval& j)
{
    const auto img = br.image();
    const auto part = intersect(img, j);
    if (part.length() <= 0.0)
        return 0.0;
    double a = br.inverse(part.lo), b = br.inverse(part.hi);
    if (a > b)
        std::swap(a, b);
    return psi.mass(a, b);
}

double pullback(const OpenSystem& system, const IntervalDensity& psi, const Interval& j)
{
    double s = 0.0;
    for (const auto& br : system.map().branches())
        s += preimage_mass(br, psi, j);
    return s;
}

} // namespace

double interval_lambda(const OpenSystem& system, const IntervalDensity& psi)
{
    double s = 0.0;
    for (const auto& j : system.surviving_set())
        s += pullback(system, psi, j);
    return s;
}

double conditional_invariance_residual(const OpenSystem& system, const IntervalDensity& psi, double lambda,
                                       int grid)
{
    const auto edges = uniform_edges(grid);
    const auto survive = system.surviving_set();
    double worst = 0.0;
    for (int i = 0; i < grid; ++i) {
        const Interval bin{edges[i], edges[i + 1]};
        double pulled = 0.0, here = 0.0;
        for (const auto& j : survive) {
            const auto part = intersect(bin, j);
            if (part.length() <= 0.0)
                continue;
            pulled += pullback(system, psi, part);
            here += psi.mass(part.lo, part.hi);
        }
        worst = std::max(worst, std::abs(pulled - lambda * here));
    }
    return worst;
}

std::vector<BoundCheck> density_bounds(const AccimResult& result, const ConstantsReport& report,
                                       const Tower& tower, int transitivity_horizon)
{
    std::vector<BoundCheck> out;
    const auto& phi = result.density->phi();
    const double scale = result.density->scale();
    const double root = 1.0 - std::sqrt(2.0 / report.mu);

    double sup_base = 0.0;
    std::vector<double> inf_base(tower.N(), std::numeric_limits<double>::infinity());
    for (const auto& c : tower.cells()) {
        if (c.level != 0)
            continue;
        for (double v : phi.cell(c.id)) {
            sup_base = std::max(sup_base, v * scale);
            inf_base[c.base] = std::min(inf_base[c.base], v * scale);
        }
    }

    {
        BoundCheck b{"sup_psi", result.sup_psi, 0.0, false, false, ""};
        b.bound = report.N / (2.0 * report.delta) * sup_base / root;
        b.pass = b.measured <= b.bound;
        out.push_back(b);
    }
    {
        BoundCheck b{"inf_psi", result.inf_psi, 0.0, false, false, ""};
        const auto& system = tower.system();
        bool any = false;
        for (int i = 0; i < tower.N(); ++i) {
            const auto n0 = coverage_time(system, tower.bases()[i], transitivity_horizon, CoverTarget::Surviving);
            if (!n0)
                continue;
            const double v = inf_base[i] / (2.0 * report.delta * std::pow(report.eta, *n0));
            if (!any || v > b.bound) {
                b.bound = v;
                b.note = "base " + std::to_string(i) + ", n0 = " + std::to_string(*n0);
            }
            any = true;
        }
        if (!any) {
            b.skipped = true;
            b.pass = true;
            b.note = "transitivity undetermined within horizon " + std::to_string(transitivity_horizon) +
                     "; inf bound not checked";
        } else {
            b.pass = b.measured >= b.bound;
        }
        out.push_back(b);
    }
    if (result.variation) {
        BoundCheck b{"variation", *result.variation, 0.0, false, false, ""};
        b.bound = report.C_tilde + 3.0 * report.N * report.M / (2.0 * report.delta * root);
        b.pass = b.measured <= b.bound;
        out.push_back(b);
    }
    {
        BoundCheck b{"lambda_ge_1_minus_qM", result.lambda, 1.0 - report.q * report.M, false, false, ""};
        b.pass = b.measured >= b.bound;
        out.push_back(b);
    }
    {
        BoundCheck b{"lambda_ge_exp_minus_xi", result.lambda, std::exp(-report.xi), false, false, ""};
        b.pass = b.measured >= b.bound;
        out.push_back(b);
    }
    return out;
}

// ---------------------------------------------------------------- solve

Solution solve(const OpenSystem& system, const SolveOptions& options)
{
    Solution s;
    const double delta = options.delta ? *options.delta : choose_delta(system);
    s.tower = std::make_shared<const Tower>(build_tower(system, delta, options.tower));
    s.constants = compute_constants(*s.tower, options.conditions);
    s.checks = check_hypotheses(s.constants, *s.tower);
    s.op = std::make_shared<const TransferOperator>(s.tower, options.samples_per_cell, options.workers);
    s.fixed = fixed_point(*s.op, options.tol, options.max_iter);
    s.result = project_density(s.fixed.phi, options.grid);
    s.result.lambda = s.fixed.lambda;
    s.result.escape_rate = -std::log(s.fixed.lambda);
    s.result.flags = s.checks;
    s.result.lambda_interval = interval_lambda(system, *s.result.density);
    s.result.residual = conditional_invariance_residual(system, *s.result.density, s.fixed.lambda, options.grid);
    s.transitivity = check_transitivity(system, options.transitivity_horizon);
    return s;
}

Solution srb_closed(const PiecewiseExpandingMap& map, const SolveOptions& options)
{
    return solve(OpenSystem(map, Hole()), options);
}

// ---------------------------------------------------------------- hole families

namespace {

Hole member(double lo, double hi)
{
    if (hi <= lo)
        return Hole();
    if (lo < 0.0 || hi > 1.0)
        throw FamilyError("hole (" + std::to_string(lo) + ", " + std::to_string(hi) + ") leaves [0,1]");
    return Hole({{lo, hi}});
}

} // namespace

HoleFamily centered_family(double point, const std::vector<double>& sizes)
{
    HoleFamily f{"centered", sizes, {}};
    for (double s : sizes)
        f.holes.push_back(member(point - 0.5 * s, point + 0.5 * s));
    return f;
}

HoleFamily right_family(double point, const std::vector<double>& sizes)
{
    HoleFamily f{"right", sizes, {}};
    for (double s : sizes)
        f.holes.push_back(member(point, point + s));
    return f;
}

FamilyReport validate_family(const PiecewiseExpandingMap& map, HoleFamily& family, int horizon)
{
    if (family.sizes.size() != family.holes.size())
        throw FamilyError("family has " + std::to_string(family.sizes.size()) + " sizes but " +
                          std::to_string(family.holes.size()) + " holes");
    if (family.holes.empty())
        throw FamilyError("empty hole family");
    for (double s : family.sizes)
        if (!(s >= 0.0))
            throw FamilyError("negative family parameter");
    std::vector<std::size_t> order(family.sizes.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return family.sizes[a] > family.sizes[b]; });
    HoleFamily sorted{family.kind, {}, {}};
    for (auto i : order) {
        sorted.sizes.push_back(family.sizes[i]);
        sorted.holes.push_back(family.holes[i]);
    }
    family = std::move(sorted);

    const Hole& top = family.holes.front();
    std::vector<double> ends;
    for (const auto& br : map.branches()) {
        ends.push_back(br.domain.lo);
        ends.push_back(br.domain.hi);
    }
    auto in_closure = [](const Hole& h, double x) {
        for (const auto& c : h.intervals())
            if (c.contains(x, kGeoEps))
                return true;
        return false;
    };
    for (std::size_t k = 0; k < family.holes.size(); ++k) {
        const auto& h = family.holes[k];
        const double s = family.sizes[k];
        if (h.measure() > s + kGeoEps)
            throw FamilyError("member s=" + std::to_string(s) + ": m(H_s) = " + std::to_string(h.measure()) +
                              " exceeds s");
        std::vector<int> used(top.count(), 0);
        for (const auto& c : h.intervals()) {
            int owner = -1;
            for (int j = 0; j < top.count(); ++j)
                if (top.intervals()[j].covers(c))
                    owner = j;
            if (owner < 0)
                throw FamilyError("member s=" + std::to_string(s) + " is not contained in the largest hole");
            if (++used[owner] > 1)
                throw FamilyError("member s=" + std::to_string(s) +
                                  " has two components inside one component of the largest hole");
        }
        for (double e : ends)
            if (in_closure(top, e) && !in_closure(h, e))
                throw FamilyError("branch endpoint " + std::to_string(e) + " lies in the closure of the largest hole" +
                                  " but not of member s=" + std::to_string(s));
    }

    FamilyReport rep;
    const OpenSystem sys(map, top);
    int worst = 0;
    for (const auto& q : sys.partition()) {
        const auto n = coverage_time(sys, q.interval, horizon, CoverTarget::Whole);
        if (!n) {
            rep.mixing_ok = false;
            continue;
        }
        worst = std::max(worst, *n);
    }
    if (rep.mixing_ok)
        rep.mixing_time = worst;
    return rep;
}

// ---------------------------------------------------------------- studies

namespace {

bool a1_status(const std::vector<HypothesisCheck>& checks)
{
    for (const auto& c : checks)
        if (c.name == "A1")
            return c.pass;
    return false;
}

} // namespace

std::vector<LipschitzRow> lipschitz_study(const PiecewiseExpandingMap& map, HoleFamily family,
                                          const SolveOptions& options)
{
    validate_family(map, family);
    std::vector<LipschitzRow> rows(family.holes.size());
    SolveOptions inner = options;
    inner.workers = 1;
    parallel_for(rows.size(), options.workers, [&](std::size_t k) {
        const OpenSystem sys(map, family.holes[k]);
        const auto sol = solve(sys, inner);
        auto& r = rows[k];
        r.s = family.sizes[k];
        r.mH = family.holes[k].measure();
        r.lambda = sol.result.lambda;
        r.one_minus_lambda = 1.0 - r.lambda;
        r.C0 = sol.constants.C0;
        r.bound = r.C0 * r.mH;
        r.slack = r.bound - r.one_minus_lambda;
        r.ratio = r.mH > 0.0 ? r.one_minus_lambda / r.mH : 0.0;
        // the fixed-point tolerance absorbs round-off in the closed member
        r.pass = r.one_minus_lambda <= r.bound + inner.tol;
        r.a1_pass = a1_status(sol.checks);
    });
    return rows;
}

const std::vector<TestFunction>& weak_battery()
{
    static const std::vector<TestFunction> battery = {
        {"one", 0, 0},
        {"x", 0, 1},
        {"x2", 0, 2},
        {"ind_0_1/2", 1, 0, 0.0, 0.5},
        {"ind_1/2_1", 1, 0, 0.5, 1.0},
        {"ind_0_1/4", 1, 0, 0.0, 0.25},
        {"ind_1/4_1/2", 1, 0, 0.25, 0.5},
        {"ind_1/2_3/4", 1, 0, 0.5, 0.75},
        {"ind_3/4_1", 1, 0, 0.75, 1.0},
    };
    return battery;
}

double integrate_test_function(const IntervalDensity& nu, const TestFunction& f)
{
    if (f.kind == 1)
        return nu.mass(f.lo, f.hi);
    const double total = nu.mass(0.0, 1.0);
    if (f.power == 0)
        return total;
    // integration by parts: int x^p dnu = nu[0,1] - int p x^(p-1) nu[0,x] dx
    auto pts = nu.breakpoints();
    const auto grid = uniform_edges(1024);
    pts.insert(pts.end(), grid.begin(), grid.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = std::clamp(pts[i], 0.0, 1.0), b = std::clamp(pts[i + 1], 0.0, 1.0);
        if (b <= a)
            continue;
        s += gauss5([&](double x) { return f.power * std::pow(x, f.power - 1) * nu.mass(0.0, x); }, a, b);
    }
    return total - s;
}

std::vector<ShrinkStudyRow> shrink_study(const PiecewiseExpandingMap& map, HoleFamily family,
                                         const std::vector<TestFunction>& battery, const SolveOptions& options)
{
    validate_family(map, family);
    SolveOptions inner = options;
    inner.workers = 1;
    const auto srb = srb_closed(map, options);
    const auto& ref = *srb.result.density;
    std::vector<double> ref_weak;
    for (const auto& f : battery)
        ref_weak.push_back(integrate_test_function(ref, f));

    std::vector<ShrinkStudyRow> rows(family.holes.size());
    parallel_for(rows.size(), options.workers, [&](std::size_t k) {
        const OpenSystem sys(map, family.holes[k]);
        const auto sol = solve(sys, inner);
        auto& r = rows[k];
        r.s = family.sizes[k];
        r.mH = family.holes[k].measure();
        r.lambda = sol.result.lambda;
        r.one_minus_lambda_over_mH = r.mH > 0.0 ? (1.0 - r.lambda) / r.mH : 0.0;
        const auto& dens = *sol.result.density;
        r.l1_dist = l1_distance(dens, ref, options.grid);
        for (std::size_t i = 0; i < battery.size(); ++i)
            r.weak_dists.push_back(std::abs(integrate_test_function(dens, battery[i]) - ref_weak[i]));
        r.residual = sol.result.residual;
    });
    return rows;
}

} // namespace accim
