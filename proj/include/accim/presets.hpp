#pragma once

#include <string>
#include <vector>

#include "accim/interval_maps.hpp"

namespace accim {

// Named maps: tripling, perturbed_tripling, affine3, cubic_lift, holder_half.
PiecewiseExpandingMap preset_map(const std::string& name);
std::vector<std::string> preset_map_names();

// Named holes: none, markov, small, offset.
Hole preset_hole(const std::string& name);
std::vector<std::string> preset_hole_names();

} // namespace accim
