#include "cvest/linalg.hpp"

#include "cvest/errors.hpp"

#include <cmath>

namespace cvest {

bool cholesky_factor(const Matrix& a, Matrix& l) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n) return false;
    l = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t t = 0; t < j; ++t) d -= l(j, t) * l(j, t);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t t = 0; t < j; ++t) s -= l(i, t) * l(j, t);
            l(i, j) = s / l(j, j);
        }
    }
    return true;
}

std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b) {
    const std::size_t n = l.rows();
    std::vector<double> y(n), x(n);
    // forward: L y = b
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t t = 0; t < i; ++t) s -= l(i, t) * y[t];
        y[i] = s / l(i, i);
    }
    // backward: L^T x = y
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t t = ii + 1; t < n; ++t) s -= l(t, ii) * x[t];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

std::vector<double> solve_spd_ridge(const Matrix& a, const std::vector<double>& b) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n || b.size() != n)
        throw Error(ErrorKind::dimension_mismatch, "solve_spd_ridge: bad shapes");

    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
    const double base = trace / static_cast<double>(n);

    Matrix l;
    // exact attempt first so clean full-rank systems solve without perturbation
    if (cholesky_factor(a, l)) return cholesky_solve(l, b);
    for (double eps = 1e-10; eps <= 1e-4 * 1.0000001; eps *= 10.0) {
        Matrix ridged = a;
        const double ridge = eps * base;
        for (std::size_t i = 0; i < n; ++i) ridged(i, i) += ridge;
        if (cholesky_factor(ridged, l)) return cholesky_solve(l, b);
    }
    throw Error(ErrorKind::singular_covariance,
                "covariance matrix not positive definite after ridge escalation");
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace cvest
