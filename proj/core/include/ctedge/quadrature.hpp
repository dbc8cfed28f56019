#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace ctedge {

// Gauss-Legendre nodes and weights on (-1, 1).
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Cached rule of order n (exact for polynomials of degree 2n - 1).
const GaussLegendre& gauss_legendre(int n);

// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
template <class F>
double gl_integrate(F&& f, double a, double b, int n) {
    const GaussLegendre& gl = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
        sum += gl.weights[i] * f(mid + half * gl.nodes[i]);
    return sum * half;
}

// Integrate f over [a, b] split into m equal panels of n points each.
template <class F>
double gl_integrate_panels(F&& f, double a, double b, int n, int m) {
    double sum = 0.0;
    const double h = (b - a) / m;
    for (int p = 0; p < m; ++p)
        sum += gl_integrate(f, a + p * h, a + (p + 1) * h, n);
    return sum;
}

// Trapezoid rule for a periodic integrand sampled at n equispaced points
// on [0, period); spectrally accurate for smooth periodic f.
template <class F>
double periodic_integrate(F&& f, double period, int n) {
    double sum = 0.0;
    const double h = period / n;
    for (int i = 0; i < n; ++i) sum += f(i * h);
    return sum * h;
}

} // namespace ctedge
