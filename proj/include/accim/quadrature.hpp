#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace accim {

// 5-point Gauss-Legendre rule on [-1,1].
inline constexpr std::array<double, 5> kGaussNodes = {
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
inline constexpr std::array<double, 5> kGaussWeights = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665, 0.2369268850561891};

template <class F>
double gauss5(F&& f, double a, double b)
{
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 5; ++i)
        s += kGaussWeights[i] * f(c + h * kGaussNodes[i]);
    return s * h;
}

// Composite rule with panels no wider than max_panel.
template <class F>
double gauss5_composite(F&& f, double a, double b, double max_panel = 1.0 / 64.0)
{
    if (b == a)
        return 0.0;
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / max_panel)));
    const double h = (b - a) / n;
    double s = 0.0;
    for (int k = 0; k < n; ++k)
        s += gauss5(f, a + k * h, (k + 1 == n) ? b : a + (k + 1) * h);
    return s;
}

} // namespace accim
