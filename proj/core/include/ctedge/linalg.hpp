#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ctedge/errors.hpp"
#include "ctedge/vec2.hpp"

namespace ctedge {

// Symmetric 2x2 matrix [[a, b], [b, c]].
struct SymMat2 {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    static SymMat2 identity(double s = 1.0) { return {s, 0.0, s}; }

    double det() const { return a * c - b * b; }
    double trace() const { return a + c; }

    SymMat2 inverse() const {
        const double d = det();
        if (!(std::abs(d) > 0.0))
            throw NumericError("SymMat2::inverse: singular matrix");
        return {c / d, -b / d, a / d};
    }

    Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, b * v.x + c * v.y}; }

    // v^T M v
    double quad_form(Vec2 v) const {
        return a * v.x * v.x + 2.0 * b * v.x * v.y + c * v.y * v.y;
    }

    SymMat2 operator*(double s) const { return {a * s, b * s, c * s}; }
    SymMat2 operator+(const SymMat2& o) const {
        return {a + o.a, b + o.b, c + o.c};
    }

    // Eigenvalues, ascending.
    void eigen(double& lo, double& hi) const {
        const double m = 0.5 * trace();
        const double r = std::sqrt(std::max(0.0, m * m - det()));
        lo = m - r;
        hi = m + r;
    }
};

// Solve the dense n x n system A x = b by partial-pivot elimination.
// A is row-major and modified in place; intended for small systems
// (polynomial fits, interpolation), not large-scale linear algebra.
std::vector<double> solve_dense(std::vector<std::vector<double>> A,
                                std::vector<double> b);

// In-place lower Cholesky factor of a symmetric positive-definite
// row-major n x n matrix; throws NumericError if a pivot fails.
void cholesky_lower(std::vector<double>& m, std::size_t n);

} // namespace ctedge
