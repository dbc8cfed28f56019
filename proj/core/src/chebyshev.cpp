#include "ctedge/chebyshev.hpp"

#include <cmath>

namespace ctedge {

double ChebyshevSeries::node(int k, int n) const {
    const double theta = M_PI * (k + 0.5) / n;
    return 0.5 * (a_ + b_) + 0.5 * (b_ - a_) * std::cos(theta);
}

std::vector<double> ChebyshevSeries::transform(
    const std::vector<double>& samples) {
    const int n = static_cast<int>(samples.size());
    std::vector<double> c(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
            acc += samples[k] * std::cos(M_PI * j * (k + 0.5) / n);
        c[j] = acc * 2.0 / n;
    }
    c[0] *= 0.5;
    return c;
}

double ChebyshevSeries::operator()(double x) const {
    const double u = (2.0 * x - a_ - b_) / (b_ - a_);
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t j = coeffs_.size(); j-- > 1;) {
        const double b0 = 2.0 * u * b1 - b2 + coeffs_[j];
        b2 = b1;
        b1 = b0;
    }
    return u * b1 - b2 + coeffs_[0];
}

} // namespace ctedge
