#include "accim/presets.hpp"

#include <stdexcept>

namespace accim {

PiecewiseExpandingMap preset_map(const std::string& name)
{
    PiecewiseExpandingMap m = [&] {
        if (name == "tripling")
            return make_lift_map({0.0, 3.0}, 0.0, 0.0, 0.0, 1.0);
        if (name == "perturbed_tripling")
            return make_lift_map({0.0, 3.0}, 0.1, 1.0, 0.0, 1.0);
        if (name == "cubic_lift") // 3x + x(1-x)/2
            return make_lift_map({0.0, 3.5, -0.5}, 0.0, 0.0, 0.0, 1.0);
        if (name == "holder_half")
            return make_lift_map({0.0, 4.0}, 0.02, 1.0, 0.0, 0.5);
        if (name == "affine3") {
            std::vector<Branch> b(3);
            b[0].domain = {0.0, 0.3};
            b[0].poly = {0.0, 1.0 / 0.3};
            b[1].domain = {0.3, 0.7};
            b[1].poly = {1.75, -2.5}; // decreasing middle branch
            b[2].domain = {0.7, 1.0};
            b[2].poly = {-0.7 / 0.3, 1.0 / 0.3};
            return PiecewiseExpandingMap(std::move(b), 1.0, 0.0, std::nullopt, false);
        }
        throw std::invalid_argument("unknown preset map '" + name + "'");
    }();
    m.set_name(name);
    return m;
}

std::vector<std::string> preset_map_names()
{
    return {"tripling", "perturbed_tripling", "affine3", "cubic_lift", "holder_half"};
}

Hole preset_hole(const std::string& name)
{
    if (name == "none")
        return Hole();
    if (name == "markov")
        return Hole({{1.0 / 3.0, 2.0 / 3.0}});
    if (name == "small")
        return Hole({{0.5, 0.502}});
    if (name == "offset")
        return Hole({{0.4, 0.41}});
    throw std::invalid_argument("unknown preset hole '" + name + "'");
}

std::vector<std::string> preset_hole_names() { return {"none", "markov", "small", "offset"}; }

} // namespace accim
