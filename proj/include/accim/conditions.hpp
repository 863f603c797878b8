#pragma once

#include <optional>
#include <string>
#include <vector>

#include "accim/tower.hpp"

namespace accim {

struct HypothesisCheck {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    double margin = 0.0; // threshold - value
    std::string note;
};

struct ConstantsReport {
    double mu = 0.0;
    double alpha = 1.0;
    double delta = 0.0;
    int N = 0;
    double eta = 0.0;          // max |T'|
    double mH = 0.0;
    double C_tilde = 0.0;
    double C = 0.0;            // C~ (2 delta)^alpha
    double beta = 0.0;         // log mu
    double gamma = 0.0;        // measured min F^'/mu^l over return pieces
    double gamma_generic = 0.0; // mu/2
    double xi = 0.0;
    double a = 0.0;
    double b = 0.0;
    double M = 0.0;
    double theta = 0.0;
    double A = 0.0;
    double q = 0.0;
    double q_bound = 0.0;      // N mH / (delta mu (1 - sqrt(2/mu)))
    double q_bound_simple = 0.0; // mH / (delta^2 (mu - sqrt(2 mu)))
    double D_H3 = 0.0;
    double lambda_lower = 0.0; // 1 - qM
    double C0 = 0.0;           // M / (delta^2 (mu - sqrt(2 mu)))
    double a_A1 = 0.0;         // max{sqrt(2/mu), 2^alpha (1+C)/mu^alpha}
    double a1_threshold = 0.0;
    double h3p_threshold = 0.0;
    double h3_threshold = 0.0;
    bool valid = true;         // false when a >= 1
};

struct ConditionOptions {
    std::optional<double> xi;
};

ConstantsReport compute_constants(const Tower& tower, const ConditionOptions& options = {});

struct LevelCheck {
    int level;
    double measured; // m(Delta^_l) = m(Delta_l) + m(H~_l)
    double bound;    // A theta^l
};
std::vector<LevelCheck> h1_levels(const ConstantsReport& report, const Tower& tower);

// (H1), (H2), (H3'), (H3), (A1) and the hole-length bound, in that order.
std::vector<HypothesisCheck> check_hypotheses(const ConstantsReport& report, const Tower& tower);

enum class CoverTarget {
    Surviving, // union of surviving images covers I
    Whole      // union of full images covers [0,1]
};

// Least n <= horizon such that J u T J_1 u ... u T^n J_n covers the target, where J_k are the
// points of J surviving k steps. Empty when undetermined.
std::optional<int> coverage_time(const OpenSystem& system, const Interval& start, int horizon,
                                 CoverTarget target = CoverTarget::Surviving);

struct TransitivityResult {
    bool determined = false;
    std::vector<int> n_j; // per Q element; -1 where undetermined
};

TransitivityResult check_transitivity(const OpenSystem& system, int horizon);

} // namespace accim
