#pragma once

#include <vector>

namespace ctedge {

// Compactly supported piecewise polynomial. Piece i covers
// [knots[i], knots[i+1]] and stores coefficients of the polynomial in the
// local coordinate v = t - piece_mid(i); midpoint-centered coordinates keep
// the coefficients well conditioned. Evaluation outside the support is zero.
class PiecewisePoly {
public:
    PiecewisePoly() = default;
    PiecewisePoly(std::vector<double> knots,
                  std::vector<std::vector<double>> coeffs);

    // Indicator-style box of the given height on [lo, hi].
    static PiecewisePoly box(double lo, double hi, double height = 1.0);

    double operator()(double t) const;

    // Evaluate with t clamped into the support; turns an antiderivative
    // into a function that is constant beyond either end.
    double evaluate_clamped(double t) const;

    int piece_count() const { return static_cast<int>(coeffs_.size()); }
    int degree() const;
    const std::vector<double>& knots() const { return knots_; }
    double support_lo() const { return knots_.front(); }
    double support_hi() const { return knots_.back(); }

    double piece_mid(int i) const {
        return 0.5 * (knots_[i] + knots_[i + 1]);
    }
    double piece_halfwidth(int i) const {
        return 0.5 * (knots_[i + 1] - knots_[i]);
    }
    const std::vector<double>& piece_coeffs(int i) const { return coeffs_[i]; }

    // Evaluate piece i's polynomial at local coordinate v; extrapolates
    // beyond the piece without any support check.
    double eval_piece(int i, double v) const;

    PiecewisePoly derivative() const;

    // F(t) = integral from support_lo() to t; F(support_lo()) = 0.
    PiecewisePoly antiderivative() const;

    PiecewisePoly reflected() const; // t -> f(-t)
    PiecewisePoly scaled(double factor) const;

    // Exact convolution (f * g)(t) = int f(s) g(t - s) ds.
    PiecewisePoly convolve(const PiecewisePoly& g) const;

    // Cross-correlation (f star g)(t) = int f(s) g(s + t) ds.
    PiecewisePoly cross_correlate(const PiecewisePoly& g) const;

    double integral() const;
    double integrate(double a, double b) const;

    // k-th moment: int t^k f(t) dt, computed exactly.
    double moment(int k) const;

private:
    int find_piece(double t) const; // -1 when t is outside the support

    std::vector<double> knots_;
    std::vector<std::vector<double>> coeffs_;
};

} // namespace ctedge
