#pragma once

#include <functional>
#include <vector>

namespace ctedge {

// Chebyshev interpolant of a smooth function on [a, b], fitted at
// first-kind Chebyshev points and evaluated by Clenshaw recurrence.
class ChebyshevSeries {
public:
    ChebyshevSeries() = default;

    template <class F>
    static ChebyshevSeries fit(F&& f, double a, double b, int n_terms) {
        std::vector<double> samples(n_terms);
        ChebyshevSeries s;
        s.a_ = a;
        s.b_ = b;
        for (int k = 0; k < n_terms; ++k)
            samples[k] = f(s.node(k, n_terms));
        s.coeffs_ = transform(samples);
        return s;
    }

    double operator()(double x) const;

    double a() const { return a_; }
    double b() const { return b_; }
    const std::vector<double>& coeffs() const { return coeffs_; }

private:
    double node(int k, int n) const;
    static std::vector<double> transform(const std::vector<double>& samples);

    double a_ = -1.0;
    double b_ = 1.0;
    std::vector<double> coeffs_;
};

} // namespace ctedge
