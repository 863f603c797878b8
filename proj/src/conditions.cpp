#include "accim/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace accim {

ConstantsReport compute_constants(const Tower& tower, const ConditionOptions& options)
{
    const auto& system = tower.system();
    const auto& map = system.map();
    ConstantsReport r;
    r.mu = map.mu();
    r.alpha = map.alpha();
    r.delta = tower.delta();
    r.N = tower.N();
    r.eta = map.max_derivative();
    r.mH = system.hole().measure();
    r.C_tilde = distortion_constant(map);
    r.C = r.C_tilde * std::pow(2.0 * r.delta, r.alpha);
    r.beta = std::log(r.mu);
    r.gamma_generic = r.mu / 2.0;

    r.gamma = std::numeric_limits<double>::infinity();
    for (const auto& c : tower.cells())
        for (const auto& p : c.pieces)
            if (p.fate == PieceFate::Return)
                r.gamma = std::min(r.gamma, p.min_derivative / std::pow(r.mu, c.level));
    if (!std::isfinite(r.gamma))
        r.gamma = r.gamma_generic;

    r.xi = options.xi ? *options.xi : std::min(0.5 * std::log(r.mu / 2.0), r.alpha * std::log(r.mu));
    if (r.alpha == 1.0)
        r.a = std::max(std::exp(-r.xi), 1.0 / r.gamma);
    else
        r.a = std::max(std::exp(-r.xi), (1.0 + r.C) / std::pow(r.gamma, r.alpha));
    r.b = 1.0 + r.C;
    r.valid = r.a < 1.0;
    r.M = r.valid ? r.b / (1.0 - r.a) : std::numeric_limits<double>::infinity();
    r.theta = 2.0 / r.mu;
    r.A = r.N / r.delta;

    for (int l = 1; l < tower.hole_levels(); ++l)
        r.q += std::exp(r.xi * (l - 1)) * tower.hole_mass(l);
    const double s2 = std::sqrt(2.0 / r.mu);
    r.q_bound = r.N * r.mH / (r.delta * r.mu * (1.0 - s2));
    r.q_bound_simple = r.mH / (r.delta * r.delta * (r.mu - std::sqrt(2.0 * r.mu)));

    double dsum = 0.0;
    for (const auto& c : tower.cells())
        for (const auto& p : c.pieces)
            if (p.fate == PieceFate::Return)
                dsum += std::exp(r.xi * c.level) * (p.z_end - p.z_begin);
    r.D_H3 = (1.0 + r.C) * dsum;

    r.lambda_lower = 1.0 - r.q * r.M;
    r.C0 = r.M / (r.delta * r.delta * (r.mu - std::sqrt(2.0 * r.mu)));
    // For alpha = 1 the nonlinearity term drops out of a, as it does for the tower constant.
    r.a_A1 = r.alpha == 1.0 ? std::max(s2, 2.0 / r.mu)
                            : std::max(s2, std::pow(2.0, r.alpha) * (1.0 + r.C) / std::pow(r.mu, r.alpha));
    r.a1_threshold = (1.0 - r.a_A1) * (1.0 - r.a_A1) * r.mu * r.delta * r.delta * (1.0 - s2) / (1.0 + r.C);
    r.h3p_threshold = r.valid ? (1.0 - r.a) * (1.0 - r.a) / r.b : 0.0;
    r.h3_threshold = r.valid ? (1.0 - r.a) * (1.0 - r.a) / (4.0 * r.b) : 0.0;
    return r;
}

std::vector<LevelCheck> h1_levels(const ConstantsReport& report, const Tower& tower)
{
    std::vector<LevelCheck> out;
    const int top = std::max(tower.top_level(), tower.hole_levels() - 1);
    for (int l = 0; l <= top; ++l)
        out.push_back({l, tower.level_mass(l) + tower.hole_mass(l), report.A * std::pow(report.theta, l)});
    return out;
}

std::vector<HypothesisCheck> check_hypotheses(const ConstantsReport& r, const Tower& tower)
{
    std::vector<HypothesisCheck> out;

    {
        HypothesisCheck h{"H1", true, 0.0, 1.0, 0.0, "max over levels of m(level)/(A theta^l)"};
        for (const auto& lv : h1_levels(r, tower))
            h.value = std::max(h.value, lv.measured / lv.bound);
        h.pass = h.value <= 1.0 + 1e-12;
        h.margin = h.threshold - h.value;
        out.push_back(h);
    }
    {
        HypothesisCheck h{"H2", false, (1.0 + r.C) / std::pow(r.gamma, r.alpha), 1.0, 0.0, ""};
        h.pass = h.value < 1.0;
        h.margin = h.threshold - h.value;
        if (r.alpha == 1.0)
            h.note = "not required when alpha = 1";
        out.push_back(h);
    }
    {
        HypothesisCheck h{"H3'", false, r.q, r.h3p_threshold, 0.0, ""};
        h.pass = r.valid && r.q <= r.h3p_threshold;
        h.margin = h.threshold - h.value;
        if (!r.valid)
            h.note = "a >= 1";
        out.push_back(h);
    }
    {
        // no base holes in a built tower, so the D m(H~_0) term vanishes
        HypothesisCheck h{"H3", false, r.q, r.h3_threshold, 0.0, "reported only"};
        h.pass = r.valid && r.q <= r.h3_threshold;
        h.margin = h.threshold - h.value;
        out.push_back(h);
    }
    {
        HypothesisCheck h{"A1", false, r.mH, r.a1_threshold, 0.0, ""};
        h.pass = r.a_A1 < 1.0 && r.mH <= r.a1_threshold;
        h.margin = h.threshold - h.value;
        if (r.a_A1 >= 1.0)
            h.note = "a >= 1 for the hole condition";
        out.push_back(h);
    }
    {
        const double bound = r.delta * (r.mu - 2.0) / 2.0;
        HypothesisCheck h{"hole_bound", false, tower.system().hole().max_length(), bound, 0.0,
                          "h <= delta(mu-2)/2"};
        h.pass = h.value <= bound + kGeoEps;
        h.margin = bound - h.value;
        out.push_back(h);
    }
    return out;
}

namespace {

bool covers_all(const std::vector<Interval>& merged, const std::vector<Interval>& targets)
{
    for (const auto& t : targets) {
        bool ok = false;
        for (const auto& u : merged)
            if (u.covers(t)) {
                ok = true;
                break;
            }
        if (!ok)
            return false;
    }
    return true;
}

} // namespace

std::optional<int> coverage_time(const OpenSystem& system, const Interval& start, int horizon,
                                 CoverTarget target)
{
    const auto& map = system.map();
    std::vector<Interval> goal;
    if (target == CoverTarget::Surviving)
        for (const auto& e : system.partition())
            goal.push_back(e.interval);
    else
        goal.push_back({0.0, 1.0});

    std::vector<Interval> current{start};
    std::vector<Interval> covered = merge_intervals(current);
    if (covers_all(covered, goal))
        return 0;
    for (int n = 1; n <= horizon; ++n) {
        std::vector<Interval> next;
        for (const auto& j : current)
            for (const auto& e : system.partition()) {
                const Interval part = intersect(j, e.interval);
                if (part.length() <= kGeoEps)
                    continue;
                const Interval img = map.branch(e.branch).image(part);
                if (target == CoverTarget::Whole)
                    covered.push_back(img);
                for (const auto& p : system.decompose(img))
                    if (p.kind != ImagePiece::Kind::InHole) {
                        next.push_back(p.span);
                        if (target == CoverTarget::Surviving)
                            covered.push_back(p.span);
                    }
            }
        current = merge_intervals(next);
        covered = merge_intervals(covered);
        if (covers_all(covered, goal))
            return n;
        if (current.empty())
            return std::nullopt;
    }
    return std::nullopt;
}

TransitivityResult check_transitivity(const OpenSystem& system, int horizon)
{
    TransitivityResult r;
    r.determined = true;
    for (const auto& e : system.partition()) {
        const auto n = coverage_time(system, e.interval, horizon);
        r.n_j.push_back(n ? *n : -1);
        r.determined = r.determined && n.has_value();
    }
    return r;
}

} // namespace accim
