#pragma once

#include <vector>

#include "accim/interval_density.hpp"
#include "accim/interval_maps.hpp"

namespace accim {

/**
 * \brief Ulam discretisation of the open transfer operator on a uniform grid.
 *
 * Bins are clipped to the surviving set I. Entry (i,j) is the fraction of the clipped bin i that
 * maps into the clipped bin j, so rows sum to one minus the escaping fraction.
 */
class UlamOperator {
public:
    UlamOperator(const OpenSystem& system, int n_bins);

    int bins() const { return n_; }
    // m(B_i n I)
    double bin_measure(int i) const { return measure_[i]; }
    // Pushes bin masses forward one step.
    std::vector<double> push(const std::vector<double>& mass) const;
    double row_sum(int i) const;

private:
    int n_;
    std::vector<double> measure_;
    std::vector<std::size_t> row_ptr_;
    std::vector<int> col_;
    std::vector<double> val_;
};

struct UlamResult {
    double lambda = 0.0;
    std::vector<double> density; // psi on each clipped bin
    std::vector<double> edges;
    int iterations = 0;
    double residual = 0.0;
    HistogramDensity as_density(const OpenSystem& system) const;
};

UlamResult ulam_oracle(const OpenSystem& system, int n_bins, double tol = 1e-14, int max_iter = 200000);

} // namespace accim
