#include "accim/ulam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace accim {

UlamOperator::UlamOperator(const OpenSystem& system, int n_bins) : n_(n_bins)
{
    if (n_bins < system.K())
        throw std::invalid_argument("Ulam grid needs at least as many bins as Q has elements");
    const auto& map = system.map();
    const auto& q = system.partition();
    measure_.assign(n_, 0.0);
    auto bin = [&](int i) { return Interval{static_cast<double>(i) / n_, static_cast<double>(i + 1) / n_}; };

    row_ptr_.push_back(0);
    for (int i = 0; i < n_; ++i) {
        std::vector<std::pair<int, double>> row;
        for (const auto& e : q) {
            const Interval a = intersect(bin(i), e.interval);
            if (a.length() <= 0.0)
                continue;
            measure_[i] += a.length();
            const auto& br = map.branch(e.branch);
            const Interval img = br.image(a);
            const int j0 = std::max(0, static_cast<int>(std::floor(img.lo * n_)));
            const int j1 = std::min(n_ - 1, static_cast<int>(std::ceil(img.hi * n_)) - 1);
            for (int j = j0; j <= j1; ++j)
                for (const auto& f : q) {
                    const Interval o = intersect(intersect(img, bin(j)), f.interval);
                    if (o.length() <= 0.0)
                        continue;
                    const double pre = std::abs(br.inverse(o.hi) - br.inverse(o.lo));
                    if (pre > 0.0)
                        row.emplace_back(j, pre);
                }
        }
        std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (!col_.empty() && row_ptr_.back() < col_.size() && col_.back() == row[k].first)
                val_.back() += row[k].second;
            else {
                col_.push_back(row[k].first);
                val_.push_back(row[k].second);
            }
        }
        if (measure_[i] > 0.0)
            for (std::size_t k = row_ptr_.back(); k < val_.size(); ++k)
                val_[k] /= measure_[i];
        row_ptr_.push_back(col_.size());
    }
}

std::vector<double> UlamOperator::push(const std::vector<double>& mass) const
{
    std::vector<double> out(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        if (mass[i] == 0.0)
            continue;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            out[col_[k]] += mass[i] * val_[k];
    }
    return out;
}

double UlamOperator::row_sum(int i) const
{
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        s += val_[k];
    return s;
}

HistogramDensity UlamResult::as_density(const OpenSystem& system) const
{
    return HistogramDensity(edges, density, system.surviving_set());
}

UlamResult ulam_oracle(const OpenSystem& system, int n_bins, double tol, int max_iter)
{
    UlamOperator op(system, n_bins);
    const double mi = system.surviving_measure();
    std::vector<double> p(n_bins);
    for (int i = 0; i < n_bins; ++i)
        p[i] = op.bin_measure(i) / mi;

    UlamResult r;
    for (int it = 1; it <= max_iter; ++it) {
        auto q = op.push(p);
        double lam = 0.0;
        for (double x : q)
            lam += x;
        if (!(lam > 0.0))
            throw std::runtime_error("Ulam iteration lost all mass");
        double res = 0.0;
        for (int i = 0; i < n_bins; ++i) {
            q[i] /= lam;
            res += std::abs(q[i] - p[i]);
        }
        p = std::move(q);
        r.lambda = lam;
        r.iterations = it;
        r.residual = res;
        if (res <= tol)
            break;
    }
    r.edges = uniform_edges(n_bins);
    r.density.resize(n_bins);
    for (int i = 0; i < n_bins; ++i)
        r.density[i] = op.bin_measure(i) > 0.0 ? p[i] / op.bin_measure(i) : 0.0;
    return r;
}

} // namespace accim
