#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace sarstv {

struct CgReport {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

// Conjugate gradient for a symmetric positive definite operator given as
// apply(in, out) with out = A * in. `x` holds the initial guess and
// receives the solution. Stops when ||b - A x|| <= tol * ||b||.
template <typename Apply>
CgReport conjugate_gradient(Apply&& apply, std::span<const double> b, std::span<double> x, double tol, int max_iter) {
    const std::size_t n = b.size();
    std::vector<double> r(n), p(n), ap(n);
    auto dot = [n](const double* a, const double* c) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * c[i];
        return s;
    };

    const double bnorm = std::sqrt(dot(b.data(), b.data()));
    CgReport report;
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        report.converged = true;
        return report;
    }

    apply(std::span<const double>(x.data(), n), std::span<double>(ap));
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    p = r;
    double rr = dot(r.data(), r.data());
    const double target = tol * bnorm;
    for (; report.iterations < max_iter; ++report.iterations) {
        if (std::sqrt(rr) <= target) break;
        apply(std::span<const double>(p), std::span<double>(ap));
        const double pap = dot(p.data(), ap.data());
        if (!(pap > 0.0)) break;
        const double step = rr / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        const double rr_next = dot(r.data(), r.data());
        const double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    report.relative_residual = std::sqrt(rr) / bnorm;
    report.converged = std::sqrt(rr) <= target;
    return report;
}

}  // namespace sarstv
