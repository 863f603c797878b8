#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "accim/analysis.hpp"
#include "accim/montecarlo.hpp"

namespace accim {

// Round-trip formatting used by every CSV writer.
std::string fmt_num(double v);

void write_density_csv(std::ostream& os, const TowerDensity& phi);
void write_psi_csv(std::ostream& os, const AccimResult& r);
void write_lipschitz_csv(std::ostream& os, const std::vector<LipschitzRow>& rows);
void write_shrink_csv(std::ostream& os, const std::vector<ShrinkStudyRow>& rows,
                      const std::vector<TestFunction>& battery = weak_battery());
void write_survival_csv(std::ostream& os, const std::vector<SurvivalRecord>& records);
void write_histogram_csv(std::ostream& os, const EmpiricalHistogram& h);

nlohmann::ordered_json constants_json(const ConstantsReport& r);
nlohmann::ordered_json checks_json(const std::vector<HypothesisCheck>& checks);
nlohmann::ordered_json bounds_json(const std::vector<BoundCheck>& bounds);
nlohmann::ordered_json tower_json(const Tower& t);

// Human-readable hypothesis table, one row per check.
void write_check_table(std::ostream& os, const ConstantsReport& r, const std::vector<HypothesisCheck>& checks);

} // namespace accim
