#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "accim/errors.hpp"
#include "accim/quadrature.hpp"
#include "accim/tower.hpp"

namespace accim {

namespace {

double pull_back_point(const PiecewiseExpandingMap& map, const std::vector<int>& itinerary, double y)
{
    for (auto it = itinerary.rbegin(); it != itinerary.rend(); ++it)
        y = map.branch(*it).inverse(y);
    return y;
}

struct Node {
    Interval image;
    int q;
    std::vector<int> itinerary;
    Interval omega;
    int sign; // +1 when the chain is increasing
};

} // namespace

double pullback_measure(const PiecewiseExpandingMap& map, const std::vector<int>& itinerary,
                        const Interval& image)
{
    if (itinerary.empty())
        return image.length();
    auto inv_jac = [&](double y) {
        double j = 1.0;
        for (auto it = itinerary.rbegin(); it != itinerary.rend(); ++it) {
            const auto& br = map.branch(*it);
            y = br.inverse(y);
            j *= std::abs(br.derivative(y));
        }
        return 1.0 / j;
    };
    bool affine = true;
    for (int b : itinerary)
        affine = affine && map.branch(b).form() == BranchForm::Affine;
    if (affine)
        return image.length() * inv_jac(image.mid());
    return gauss5_composite(inv_jac, image.lo, image.hi);
}

bool hole_bound_holds(const OpenSystem& system, double delta)
{
    return system.hole().max_length() <= delta * (system.map().mu() - 2.0) / 2.0 + kGeoEps;
}

GrowthPartition growth_partition(const OpenSystem& system, const Interval& omega, double delta,
                                 const GrowthOptions& options)
{
    const auto& map = system.map();
    const int q0 = system.q_index(omega.mid());
    if (q0 < 0 || !system.q(q0).interval.covers(omega))
        throw std::invalid_argument("seed interval must lie inside one element of Q");
    if (omega.length() < delta * (1.0 - 1e-12))
        throw std::invalid_argument("seed interval is shorter than delta");

    GrowthPartition out;
    out.hole_bound_ok = hole_bound_holds(system, delta);
    if (!out.hole_bound_ok && options.enforce_hole_bound)
        throw HypothesisFailure("hole component longer than delta(mu-2)/2");

    std::vector<Node> nodes{{omega, q0, {}, omega, 1}};
    out.tail.push_back(omega.length());

    for (int n = 1; n <= options.n_max && !nodes.empty(); ++n) {
        std::vector<Node> next;
        double level_mass = 0.0;
        for (const auto& node : nodes) {
            const int b = system.q(node.q).branch;
            const auto& br = map.branch(b);
            const int sign = node.sign * (br.increasing() ? 1 : -1);
            auto pieces = system.decompose(br.image(node.image));
            std::vector<int> itin = node.itinerary;
            itin.push_back(b);

            // omega endpoints of the image cut points, outer ends reused from the parent
            const std::size_t m = pieces.size();
            std::vector<double> xs(m + 1);
            for (std::size_t i = 1; i < m; ++i)
                xs[i] = pull_back_point(map, itin, pieces[i].span.lo);
            xs[0] = sign > 0 ? node.omega.lo : node.omega.hi;
            xs[m] = sign > 0 ? node.omega.hi : node.omega.lo;

            for (std::size_t i = 0; i < m; ++i) {
                const auto& p = pieces[i];
                Interval om{std::min(xs[i], xs[i + 1]), std::max(xs[i], xs[i + 1])};
                const double meas = pullback_measure(map, itin, p.span);
                if (p.kind == ImagePiece::Kind::Partial) {
                    next.push_back({p.span, p.index, itin, om, sign});
                    level_mass += meas;
                    continue;
                }
                PartitionElement e;
                e.omega = om;
                e.stop_time = n;
                e.fate = p.kind == ImagePiece::Kind::Covers ? ElementFate::ReturnsTo : ElementFate::FallsInHole;
                e.target = p.index;
                e.measure = meas;
                e.image = p.span;
                e.itinerary = itin;
                if (e.fate == ElementFate::FallsInHole)
                    out.hole_mass += meas;
                out.elements.push_back(std::move(e));
            }
        }
        if (next.size() > options.max_pieces)
            throw std::runtime_error("growth partition exceeded the piece limit");
        nodes = std::move(next);
        out.tail.push_back(level_mass);
    }
    for (const auto& node : nodes)
        out.remainder.push_back(node.omega);
    out.remainder_mass = nodes.empty() ? 0.0 : out.tail.back();
    return out;
}

} // namespace accim
