#include "ctedge/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace ctedge {

std::vector<double> solve_dense(std::vector<std::vector<double>> A,
                                std::vector<double> b) {
    const std::size_t n = b.size();
    if (A.size() != n) throw NumericError("solve_dense: shape mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
        if (std::abs(A[pivot][col]) == 0.0)
            throw NumericError("solve_dense: singular system");
        std::swap(A[pivot], A[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[r][col] / A[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= A[i][c] * x[c];
        x[i] = s / A[i][i];
    }
    return x;
}

void cholesky_lower(std::vector<double>& m, std::size_t n) {
    if (m.size() != n * n) throw NumericError("cholesky_lower: shape mismatch");
    for (std::size_t j = 0; j < n; ++j) {
        double d = m[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= m[j * n + k] * m[j * n + k];
        if (!(d > 0.0))
            throw NumericError("cholesky_lower: matrix not positive definite");
        const double l = std::sqrt(d);
        m[j * n + j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m[i * n + j];
            for (std::size_t k = 0; k < j; ++k)
                s -= m[i * n + k] * m[j * n + k];
            m[i * n + j] = s / l;
        }
        for (std::size_t c = j + 1; c < n; ++c) m[j * n + c] = 0.0;
    }
}

} // namespace ctedge
