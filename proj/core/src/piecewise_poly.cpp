#include "ctedge/piecewise_poly.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ctedge/errors.hpp"
#include "ctedge/linalg.hpp"
#include "ctedge/quadrature.hpp"

namespace ctedge {

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// int_{-w}^{w} v^e dv
double sym_power_integral(int e, double w) {
    if (e % 2 != 0) return 0.0;
    return 2.0 * std::pow(w, e + 1) / (e + 1);
}

} // namespace

PiecewisePoly::PiecewisePoly(std::vector<double> knots,
                             std::vector<std::vector<double>> coeffs)
    : knots_(std::move(knots)), coeffs_(std::move(coeffs)) {
    if (knots_.size() < 2 || coeffs_.size() + 1 != knots_.size())
        throw NumericError("PiecewisePoly: knots/coeffs size mismatch");
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
        if (!(knots_[i] < knots_[i + 1]))
            throw NumericError("PiecewisePoly: knots must be increasing");
    for (auto& c : coeffs_)
        if (c.empty()) c.push_back(0.0);
}

PiecewisePoly PiecewisePoly::box(double lo, double hi, double height) {
    return PiecewisePoly({lo, hi}, {{height}});
}

int PiecewisePoly::find_piece(double t) const {
    if (t < knots_.front() || t > knots_.back()) return -1;
    if (t == knots_.back()) return piece_count() - 1;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    return static_cast<int>(it - knots_.begin()) - 1;
}

double PiecewisePoly::eval_piece(int i, double v) const {
    const std::vector<double>& c = coeffs_[i];
    double r = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) r = r * v + c[k];
    return r;
}

double PiecewisePoly::operator()(double t) const {
    const int i = find_piece(t);
    if (i < 0) return 0.0;
    return eval_piece(i, t - piece_mid(i));
}

double PiecewisePoly::evaluate_clamped(double t) const {
    const double tc = std::clamp(t, knots_.front(), knots_.back());
    return (*this)(tc);
}

int PiecewisePoly::degree() const {
    std::size_t d = 1;
    for (const auto& c : coeffs_) d = std::max(d, c.size());
    return static_cast<int>(d) - 1;
}

PiecewisePoly PiecewisePoly::derivative() const {
    std::vector<std::vector<double>> out(coeffs_.size());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        const auto& c = coeffs_[i];
        std::vector<double> d;
        for (std::size_t k = 1; k < c.size(); ++k)
            d.push_back(static_cast<double>(k) * c[k]);
        if (d.empty()) d.push_back(0.0);
        out[i] = std::move(d);
    }
    return PiecewisePoly(knots_, std::move(out));
}

PiecewisePoly PiecewisePoly::antiderivative() const {
    std::vector<std::vector<double>> out(coeffs_.size());
    double cumulative = 0.0;
    for (int i = 0; i < piece_count(); ++i) {
        const auto& c = coeffs_[i];
        const double w = piece_halfwidth(i);
        std::vector<double> a(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) a[k + 1] = c[k] / (k + 1.0);
        // Fix the constant so the antiderivative is continuous:
        // value at the left edge (v = -w) equals the running integral.
        double left = 0.0;
        for (std::size_t k = a.size(); k-- > 1;) left = (left + a[k]) * (-w);
        a[0] = cumulative - left;
        for (std::size_t k = 0; k < c.size(); ++k)
            cumulative += c[k] * sym_power_integral(static_cast<int>(k), w);
        out[i] = std::move(a);
    }
    return PiecewisePoly(knots_, std::move(out));
}

PiecewisePoly PiecewisePoly::reflected() const {
    const int n = piece_count();
    std::vector<double> rk(knots_.size());
    for (std::size_t i = 0; i < knots_.size(); ++i)
        rk[i] = -knots_[knots_.size() - 1 - i];
    std::vector<std::vector<double>> rc(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> c = coeffs_[n - 1 - i];
        for (std::size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
        rc[i] = std::move(c);
    }
    return PiecewisePoly(std::move(rk), std::move(rc));
}

PiecewisePoly PiecewisePoly::scaled(double factor) const {
    std::vector<std::vector<double>> out = coeffs_;
    for (auto& c : out)
        for (double& v : c) v *= factor;
    return PiecewisePoly(knots_, std::move(out));
}

double PiecewisePoly::integral() const {
    double sum = 0.0;
    for (int i = 0; i < piece_count(); ++i) {
        const auto& c = coeffs_[i];
        const double w = piece_halfwidth(i);
        for (std::size_t k = 0; k < c.size(); ++k)
            sum += c[k] * sym_power_integral(static_cast<int>(k), w);
    }
    return sum;
}

double PiecewisePoly::integrate(double a, double b) const {
    if (a > b) return -integrate(b, a);
    const double lo = std::max(a, support_lo());
    const double hi = std::min(b, support_hi());
    if (!(lo < hi)) return 0.0;
    double sum = 0.0;
    for (int i = 0; i < piece_count(); ++i) {
        const double pl = std::max(lo, knots_[i]);
        const double ph = std::min(hi, knots_[i + 1]);
        if (!(pl < ph)) continue;
        const auto& c = coeffs_[i];
        const double m = piece_mid(i), vl = pl - m, vh = ph - m;
        for (std::size_t k = 0; k < c.size(); ++k)
            sum += c[k] / (k + 1.0) *
                   (std::pow(vh, k + 1.0) - std::pow(vl, k + 1.0));
    }
    return sum;
}

double PiecewisePoly::moment(int k) const {
    double sum = 0.0;
    for (int i = 0; i < piece_count(); ++i) {
        const auto& c = coeffs_[i];
        const double m = piece_mid(i), w = piece_halfwidth(i);
        // t^k = (m + v)^k expanded binomially against each coefficient.
        for (int j = 0; j <= k; ++j) {
            const double bc = binomial(k, j) * std::pow(m, k - j);
            for (std::size_t l = 0; l < c.size(); ++l)
                sum += bc * c[l] *
                       sym_power_integral(j + static_cast<int>(l), w);
        }
    }
    return sum;
}

PiecewisePoly PiecewisePoly::convolve(const PiecewisePoly& g) const {
    const PiecewisePoly& f = *this;
    const int df = f.degree(), dg = g.degree();
    const int dr = df + dg + 1;
    const int gl_n = (df + dg) / 2 + 1;

    // Exact convolution sample: split the s-integral at every breakpoint of
    // f(s) and of g(t - s) so each sub-integrand is a single polynomial.
    auto sample = [&](double t) {
        double lo = std::max(f.support_lo(), t - g.support_hi());
        double hi = std::min(f.support_hi(), t - g.support_lo());
        if (!(lo < hi)) return 0.0;
        std::vector<double> cuts{lo, hi};
        for (double kf : f.knots())
            if (kf > lo && kf < hi) cuts.push_back(kf);
        for (double kg : g.knots()) {
            const double s = t - kg;
            if (s > lo && s < hi) cuts.push_back(s);
        }
        std::sort(cuts.begin(), cuts.end());
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (!(cuts[i] < cuts[i + 1])) continue;
            acc += gl_integrate([&](double s) { return f(s) * g(t - s); },
                                cuts[i], cuts[i + 1], gl_n);
        }
        return acc;
    };

    // Result knots: all pairwise sums of input knots.
    std::vector<double> sums;
    for (double a : f.knots())
        for (double b : g.knots()) sums.push_back(a + b);
    std::sort(sums.begin(), sums.end());
    const double span = sums.back() - sums.front();
    const double tol = 1e-9 * std::max(1.0, span);
    std::vector<double> rknots;
    for (double s : sums)
        if (rknots.empty() || s - rknots.back() > tol) rknots.push_back(s);
    if (rknots.size() < 2)
        throw NumericError("convolve: degenerate support");

    // Fit each piece at Chebyshev points, then verify at held-out points.
    std::vector<std::vector<double>> rcoeffs;
    rcoeffs.reserve(rknots.size() - 1);
    const int n_fit = dr + 1;
    for (std::size_t i = 0; i + 1 < rknots.size(); ++i) {
        const double mid = 0.5 * (rknots[i] + rknots[i + 1]);
        const double hw = 0.5 * (rknots[i + 1] - rknots[i]);
        std::vector<std::vector<double>> V(n_fit, std::vector<double>(n_fit));
        std::vector<double> rhs(n_fit);
        double scale = 0.0;
        for (int s = 0; s < n_fit; ++s) {
            const double v = hw * std::cos(M_PI * (s + 0.5) / n_fit);
            double p = 1.0;
            for (int c = 0; c < n_fit; ++c) {
                V[s][c] = p;
                p *= v;
            }
            rhs[s] = sample(mid + v);
            scale = std::max(scale, std::abs(rhs[s]));
        }
        std::vector<double> coef = solve_dense(std::move(V), rhs);
        for (double frac : {-0.9, 0.17, 0.71}) {
            const double v = hw * frac;
            double fit = 0.0;
            for (std::size_t c = coef.size(); c-- > 0;) fit = fit * v + coef[c];
            if (std::abs(fit - sample(mid + v)) > 1e-10 * (1.0 + scale))
                throw NumericError("convolve: piece fit residual too large");
        }
        rcoeffs.push_back(std::move(coef));
    }
    return PiecewisePoly(std::move(rknots), std::move(rcoeffs));
}

PiecewisePoly PiecewisePoly::cross_correlate(const PiecewisePoly& g) const {
    return reflected().convolve(g);
}

} // namespace ctedge
