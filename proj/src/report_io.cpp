#include "accim/report_io.hpp"

#include <cmath>
#include <cstdio>

namespace accim {

std::string fmt_num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_density_csv(std::ostream& os, const TowerDensity& phi)
{
    const auto& grid = phi.grid();
    const auto& t = grid.tower();
    os << "base,level,cell,x,phi\n";
    for (const auto& c : t.cells()) {
        const auto v = phi.cell(c.id);
        for (int s = 0; s < grid.g(); ++s)
            os << c.base << ',' << c.level << ',' << c.id << ',' << fmt_num(grid.y(c.id, s)) << ',' << fmt_num(v[s])
               << '\n';
    }
}

void write_psi_csv(std::ostream& os, const AccimResult& r)
{
    os << "x,psi\n";
    for (std::size_t i = 0; i < r.psi.size(); ++i)
        os << fmt_num(0.5 * (r.edges[i] + r.edges[i + 1])) << ',' << fmt_num(r.psi[i]) << '\n';
}

void write_lipschitz_csv(std::ostream& os, const std::vector<LipschitzRow>& rows)
{
    os << "s,mH,lambda,one_minus_lambda,C0,bound,slack,ratio,pass,a1_pass\n";
    for (const auto& r : rows)
        os << fmt_num(r.s) << ',' << fmt_num(r.mH) << ',' << fmt_num(r.lambda) << ',' << fmt_num(r.one_minus_lambda)
           << ',' << fmt_num(r.C0) << ',' << fmt_num(r.bound) << ',' << fmt_num(r.slack) << ',' << fmt_num(r.ratio)
           << ',' << (r.pass ? 1 : 0) << ',' << (r.a1_pass ? 1 : 0) << '\n';
}

void write_shrink_csv(std::ostream& os, const std::vector<ShrinkStudyRow>& rows,
                      const std::vector<TestFunction>& battery)
{
    os << "s,mH,lambda,one_minus_lambda_over_mH,l1_dist,residual";
    for (const auto& f : battery)
        os << ",weak_" << f.name;
    os << '\n';
    for (const auto& r : rows) {
        os << fmt_num(r.s) << ',' << fmt_num(r.mH) << ',' << fmt_num(r.lambda) << ','
           << fmt_num(r.one_minus_lambda_over_mH) << ',' << fmt_num(r.l1_dist) << ',' << fmt_num(r.residual);
        for (double w : r.weak_dists)
            os << ',' << fmt_num(w);
        os << '\n';
    }
}

void write_survival_csv(std::ostream& os, const std::vector<SurvivalRecord>& records)
{
    os << "n,survivors,p_n,ratio,stderr\n";
    for (const auto& r : records)
        os << r.n << ',' << r.survivors << ',' << fmt_num(r.p_n) << ',' << fmt_num(r.ratio) << ','
           << fmt_num(r.std_error) << '\n';
}

void write_histogram_csv(std::ostream& os, const EmpiricalHistogram& h)
{
    os << "bin_left,bin_right,density,stderr\n";
    for (std::size_t i = 0; i < h.density.size(); ++i)
        os << fmt_num(h.edges[i]) << ',' << fmt_num(h.edges[i + 1]) << ',' << fmt_num(h.density[i]) << ','
           << fmt_num(h.std_error[i]) << '\n';
}

nlohmann::ordered_json constants_json(const ConstantsReport& r)
{
    return {
        {"mu", r.mu},
        {"alpha", r.alpha},
        {"delta", r.delta},
        {"N", r.N},
        {"eta", r.eta},
        {"mH", r.mH},
        {"C_tilde", r.C_tilde},
        {"C", r.C},
        {"beta", r.beta},
        {"gamma", r.gamma},
        {"gamma_generic", r.gamma_generic},
        {"xi", r.xi},
        {"a", r.a},
        {"b", r.b},
        {"M", r.M},
        {"theta", r.theta},
        {"A", r.A},
        {"q", r.q},
        {"q_bound", r.q_bound},
        {"q_bound_simple", r.q_bound_simple},
        {"D_H3", r.D_H3},
        {"lambda_lower", r.lambda_lower},
        {"C0", r.C0},
        {"a_A1", r.a_A1},
        {"a1_threshold", r.a1_threshold},
        {"h3p_threshold", r.h3p_threshold},
        {"h3_threshold", r.h3_threshold},
        {"valid", r.valid},
    };
}

nlohmann::ordered_json checks_json(const std::vector<HypothesisCheck>& checks)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"value", c.value},
                       {"threshold", c.threshold},
                       {"margin", c.margin},
                       {"note", c.note}});
    return arr;
}

nlohmann::ordered_json bounds_json(const std::vector<BoundCheck>& bounds)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto& b : bounds)
        arr.push_back({{"name", b.name},
                       {"pass", b.pass},
                       {"skipped", b.skipped},
                       {"measured", b.measured},
                       {"bound", b.bound},
                       {"note", b.note}});
    return arr;
}

nlohmann::ordered_json tower_json(const Tower& t)
{
    nlohmann::ordered_json j;
    j["N"] = t.N();
    j["delta"] = t.delta();
    j["l_max"] = t.l_max();
    j["top_level"] = t.top_level();
    j["tail_mass"] = t.tail_mass();
    j["tail_converged"] = t.tail_converged();
    j["hole_bound_ok"] = t.hole_bound_ok();
    auto bases = nlohmann::ordered_json::array();
    for (const auto& b : t.bases())
        bases.push_back({b.lo, b.hi});
    j["bases"] = bases;
    static const char* fates[] = {"continue", "return", "hole", "truncated"};
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : t.cells()) {
        auto pieces = nlohmann::ordered_json::array();
        for (const auto& p : c.pieces)
            pieces.push_back({{"span", {p.span.lo, p.span.hi}},
                              {"fate", fates[static_cast<int>(p.fate)]},
                              {"target", p.target},
                              {"z", {p.z_begin, p.z_end}}});
        cells.push_back({{"id", c.id},
                         {"base", c.base},
                         {"level", c.level},
                         {"parent", c.parent},
                         {"q", c.q},
                         {"orientation", c.orientation},
                         {"projected", {c.projected.lo, c.projected.hi}},
                         {"measure", c.measure},
                         {"pieces", pieces}});
    }
    j["cells"] = cells;
    auto holes = nlohmann::ordered_json::array();
    for (const auto& h : t.holes())
        holes.push_back({{"base", h.base},
                         {"level", h.level},
                         {"cell", h.cell},
                         {"component", h.component},
                         {"span", {h.span.lo, h.span.hi}},
                         {"measure", h.measure}});
    j["holes"] = holes;
    return j;
}

void write_check_table(std::ostream& os, const ConstantsReport& r, const std::vector<HypothesisCheck>& checks)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "mu = %.10g  alpha = %.10g  delta = %.10g  N = %d  mH = %.10g\n", r.mu, r.alpha,
                  r.delta, r.N, r.mH);
    os << buf;
    std::snprintf(buf, sizeof buf, "xi = %.10g  a = %.10g  b = %.10g  M = %.10g  q = %.10g  C0 = %.10g\n", r.xi, r.a,
                  r.b, r.M, r.q, r.C0);
    os << buf;
    for (const auto& c : checks) {
        std::snprintf(buf, sizeof buf, "%-10s %s  value = %.6e  threshold = %.6e  margin = %+.6e", c.name.c_str(),
                      c.pass ? "PASS" : "FAIL", c.value, c.threshold, c.margin);
        os << buf;
        if (!c.note.empty())
            os << "  (" << c.note << ')';
        os << '\n';
    }
}

} // namespace accim
