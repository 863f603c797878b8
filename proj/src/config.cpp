#include "accim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "accim/errors.hpp"
#include "accim/presets.hpp"

namespace accim {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : -1; }

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) { throw ConfigError(msg, line_of(n)); }

void only_keys(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& where)
{
    if (!n.IsMap())
        fail(n, where + " must be a mapping");
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key))
            fail(kv.first, "unknown key '" + key + "' in " + where);
    }
}

double num(const YAML::Node& n, const std::string& what)
{
    if (!n.IsScalar())
        fail(n, what + " must be a number");
    try {
        return parse_number(n.Scalar());
    } catch (const std::exception&) {
        fail(n, what + ": cannot parse '" + n.Scalar() + "' as a number");
    }
}

long long integer(const YAML::Node& n, const std::string& what)
{
    const double v = num(n, what);
    if (v != std::floor(v) || std::abs(v) > 9e15)
        fail(n, what + " must be an integer");
    return static_cast<long long>(v);
}

bool boolean(const YAML::Node& n, const std::string& what)
{
    try {
        return n.as<bool>();
    } catch (const YAML::Exception&) {
        fail(n, what + " must be true or false");
    }
}

std::string text(const YAML::Node& n, const std::string& what)
{
    if (!n.IsScalar())
        fail(n, what + " must be a string");
    return n.Scalar();
}

std::vector<double> numbers(const YAML::Node& n, const std::string& what)
{
    if (!n.IsSequence())
        fail(n, what + " must be a list");
    std::vector<double> v;
    for (const auto& x : n)
        v.push_back(num(x, what));
    return v;
}

Interval pair(const YAML::Node& n, const std::string& what)
{
    const auto v = numbers(n, what);
    if (v.size() != 2)
        fail(n, what + " must have two entries");
    return {v[0], v[1]};
}

PiecewiseExpandingMap parse_map(const YAML::Node& n)
{
    only_keys(n, {"preset", "lift", "branches", "alpha", "holder_const", "mu", "wrap"}, "map");
    const int forms = (n["preset"] ? 1 : 0) + (n["lift"] ? 1 : 0) + (n["branches"] ? 1 : 0);
    if (forms != 1)
        fail(n, "map needs exactly one of preset, lift, branches");
    const double alpha = n["alpha"] ? num(n["alpha"], "map.alpha") : 1.0;
    std::optional<double> hc, mu;
    if (n["holder_const"])
        hc = num(n["holder_const"], "map.holder_const");
    if (n["mu"])
        mu = num(n["mu"], "map.mu");
    try {
        if (n["preset"]) {
            if (n["alpha"] || hc || mu)
                fail(n, "preset maps fix alpha, holder_const and mu");
            return preset_map(text(n["preset"], "map.preset"));
        }
        if (n["lift"]) {
            const auto& l = n["lift"];
            only_keys(l, {"poly", "sin_amp", "sin_freq", "sin_phase"}, "map.lift");
            if (!l["poly"])
                fail(l, "map.lift needs poly");
            auto m = make_lift_map(numbers(l["poly"], "map.lift.poly"),
                                   l["sin_amp"] ? num(l["sin_amp"], "sin_amp") : 0.0,
                                   l["sin_freq"] ? num(l["sin_freq"], "sin_freq") : 0.0,
                                   l["sin_phase"] ? num(l["sin_phase"], "sin_phase") : 0.0, alpha, hc, mu);
            m.set_name("lift");
            return m;
        }
        const auto& bs = n["branches"];
        if (!bs.IsSequence() || bs.size() == 0)
            fail(bs, "map.branches must be a non-empty list");
        std::vector<Branch> branches;
        for (const auto& b : bs) {
            only_keys(b, {"domain", "poly", "sin_amp", "sin_freq", "sin_phase", "shift"}, "branch");
            if (!b["domain"] || !b["poly"])
                fail(b, "branch needs domain and poly");
            Branch br;
            br.domain = pair(b["domain"], "branch.domain");
            br.poly = numbers(b["poly"], "branch.poly");
            if (b["sin_amp"])
                br.sin_amp = num(b["sin_amp"], "branch.sin_amp");
            if (b["sin_freq"])
                br.sin_freq = num(b["sin_freq"], "branch.sin_freq");
            if (b["sin_phase"])
                br.sin_phase = num(b["sin_phase"], "branch.sin_phase");
            if (b["shift"])
                br.shift = num(b["shift"], "branch.shift");
            branches.push_back(std::move(br));
        }
        const bool wrap = n["wrap"] ? boolean(n["wrap"], "map.wrap") : false;
        PiecewiseExpandingMap m(std::move(branches), alpha, hc, mu, wrap);
        m.set_name("branches");
        return m;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail(n, std::string("invalid map: ") + e.what());
    }
}

Hole parse_hole(const YAML::Node& n)
{
    if (n.IsNull())
        return Hole();
    only_keys(n, {"intervals", "preset"}, "hole");
    try {
        if (n["preset"])
            return preset_hole(text(n["preset"], "hole.preset"));
        if (!n["intervals"])
            return Hole();
        const auto& iv = n["intervals"];
        if (!iv.IsSequence())
            fail(iv, "hole.intervals must be a list of [lo, hi] pairs");
        std::vector<Interval> v;
        for (const auto& p : iv)
            v.push_back(pair(p, "hole interval"));
        return Hole(std::move(v));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail(n, std::string("invalid hole: ") + e.what());
    }
}

} // namespace

double parse_number(const std::string& s)
{
    const auto slash = s.find('/');
    std::size_t used = 0;
    if (slash == std::string::npos) {
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument("trailing characters");
        return v;
    }
    const std::string a = s.substr(0, slash), b = s.substr(slash + 1);
    std::size_t ua = 0, ub = 0;
    const double p = std::stod(a, &ua), q = std::stod(b, &ub);
    if (ua != a.size() || ub != b.size() || q == 0.0)
        throw std::invalid_argument("bad rational");
    return p / q;
}

HoleFamily FamilyConfig::build() const
{
    if (shape == "centered")
        return centered_family(point, sizes);
    if (shape == "right")
        return right_family(point, sizes);
    throw FamilyError("unknown family shape '" + shape + "'");
}

const PiecewiseExpandingMap& ExperimentConfig::require_map() const
{
    if (!map)
        throw ConfigError("config has no map section");
    return *map;
}

ExperimentConfig parse_config(const std::string& src)
{
    YAML::Node root;
    try {
        root = YAML::Load(src);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : -1);
    }
    ExperimentConfig c;
    if (root.IsNull())
        return c;
    only_keys(root, {"map", "hole", "hole_family", "tower", "solver", "montecarlo", "seed", "output"}, "config");
    if (root["map"])
        c.map = parse_map(root["map"]);
    if (root["hole"])
        c.hole = parse_hole(root["hole"]);
    if (const auto f = root["hole_family"]) {
        only_keys(f, {"shape", "point", "sizes"}, "hole_family");
        FamilyConfig fc;
        if (f["shape"]) {
            fc.shape = text(f["shape"], "hole_family.shape");
            if (fc.shape != "centered" && fc.shape != "right")
                fail(f["shape"], "hole_family.shape must be centered or right");
        }
        if (f["point"])
            fc.point = num(f["point"], "hole_family.point");
        if (!f["sizes"])
            fail(f, "hole_family needs sizes");
        fc.sizes = numbers(f["sizes"], "hole_family.sizes");
        c.family = fc;
    }
    if (const auto t = root["tower"]) {
        only_keys(t, {"delta", "xi", "l_max", "tail_tolerance", "level_cap", "enforce_hole_bound", "max_cells", "stop_early"},
                  "tower");
        if (t["delta"])
            c.solve.delta = num(t["delta"], "tower.delta");
        if (t["xi"])
            c.solve.conditions.xi = num(t["xi"], "tower.xi");
        if (t["l_max"])
            c.solve.tower.l_max = static_cast<int>(integer(t["l_max"], "tower.l_max"));
        if (t["tail_tolerance"])
            c.solve.tower.tail_tolerance = num(t["tail_tolerance"], "tower.tail_tolerance");
        if (t["level_cap"])
            c.solve.tower.level_cap = static_cast<int>(integer(t["level_cap"], "tower.level_cap"));
        if (t["enforce_hole_bound"])
            c.solve.tower.enforce_hole_bound = boolean(t["enforce_hole_bound"], "tower.enforce_hole_bound");
        if (t["stop_early"])
            c.solve.tower.stop_early = boolean(t["stop_early"], "tower.stop_early");
        if (t["max_cells"])
            c.solve.tower.max_cells = static_cast<std::size_t>(integer(t["max_cells"], "tower.max_cells"));
    }
    if (const auto s = root["solver"]) {
        only_keys(s, {"samples_per_cell", "tol", "max_iter", "grid", "ulam_bins", "transitivity_horizon"}, "solver");
        if (s["samples_per_cell"])
            c.solve.samples_per_cell = static_cast<int>(integer(s["samples_per_cell"], "solver.samples_per_cell"));
        if (s["tol"])
            c.solve.tol = num(s["tol"], "solver.tol");
        if (s["max_iter"])
            c.solve.max_iter = static_cast<int>(integer(s["max_iter"], "solver.max_iter"));
        if (s["grid"])
            c.solve.grid = static_cast<int>(integer(s["grid"], "solver.grid"));
        if (s["ulam_bins"])
            c.ulam_bins = static_cast<int>(integer(s["ulam_bins"], "solver.ulam_bins"));
        if (s["transitivity_horizon"])
            c.solve.transitivity_horizon =
                static_cast<int>(integer(s["transitivity_horizon"], "solver.transitivity_horizon"));
        if (c.solve.samples_per_cell < 2)
            fail(s, "solver.samples_per_cell must be at least 2");
        if (c.solve.grid < 1)
            fail(s, "solver.grid must be positive");
    }
    if (const auto m = root["montecarlo"]) {
        only_keys(m, {"particles", "steps", "bins", "hist_step", "initial", "window"}, "montecarlo");
        if (m["particles"])
            c.mc.particles = integer(m["particles"], "montecarlo.particles");
        if (m["steps"])
            c.mc.steps = static_cast<int>(integer(m["steps"], "montecarlo.steps"));
        if (m["bins"])
            c.mc.bins = static_cast<int>(integer(m["bins"], "montecarlo.bins"));
        if (m["hist_step"])
            c.mc.hist_step = static_cast<int>(integer(m["hist_step"], "montecarlo.hist_step"));
        if (m["initial"]) {
            c.mc.initial = text(m["initial"], "montecarlo.initial");
            if (c.mc.initial != "uniform" && c.mc.initial != "ramp")
                fail(m["initial"], "montecarlo.initial must be uniform or ramp");
        }
        if (m["window"]) {
            const auto w = pair(m["window"], "montecarlo.window");
            c.mc.window_begin = static_cast<int>(w.lo);
            c.mc.window_end = static_cast<int>(w.hi);
        }
        if (c.mc.particles < 1)
            fail(m, "montecarlo.particles must be positive");
    }
    if (root["seed"])
        c.seed = static_cast<std::uint64_t>(integer(root["seed"], "seed"));
    if (root["output"])
        c.output = text(root["output"], "output");
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace accim
