#pragma once
// Independent reference implementations used as test oracles. None of these
// call into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("sarstv_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

/// Cyclic Jacobi eigenvalue algorithm for a symmetric matrix. Returns
/// eigenvalues descending with matching unit eigenvectors as columns.
inline std::pair<std::vector<double>, std::vector<std::vector<double>>> jacobi_eigen(
    std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
    for (std::size_t i : order) {
        values.push_back(a[i][i]);
        std::vector<double> col(n);
        for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
        vectors.push_back(col);
    }
    return {values, vectors};
}

/// Sample covariance (1/(n-1)) of rows-as-samples data.
inline std::vector<std::vector<double>> covariance(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size(), d = rows.front().size();
    std::vector<double> mean(d, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) mean[j] += r[j] / static_cast<double>(n);
    std::vector<std::vector<double>> c(d, std::vector<double>(d, 0.0));
    for (const auto& r : rows)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / static_cast<double>(n - 1);
    return c;
}

/// Explicit (I + beta2 * D^T D) matrix for forward differences with a
/// Neumann boundary on an h x w grid, solved densely.
inline std::vector<double> dense_smooth_solve(const std::vector<double>& v, int h, int w, double beta2) {
    const int n = h * w;
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * n, n);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int i = r * w + c;
            if (r + 1 < h) {
                d(i, i + w) = 1.0;
                d(i, i) = -1.0;
            }
            if (c + 1 < w) {
                d(n + i, i + 1) = 1.0;
                d(n + i, i) = -1.0;
            }
        }
    }
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + beta2 * d.transpose() * d;
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
    const Eigen::VectorXd u = a.fullPivLu().solve(rhs);
    return {u.data(), u.data() + n};
}

/// Exact minimizer of p^T Q p over the probability simplex by enumerating
/// every support set and solving its equality-constrained KKT system.
inline Eigen::VectorXd simplex_qp(const Eigen::MatrixXd& q) {
    const int k = static_cast<int>(q.rows());
    Eigen::VectorXd best;
    double best_val = std::numeric_limits<double>::infinity();
    for (int mask = 1; mask < (1 << k); ++mask) {
        std::vector<int> s;
        for (int i = 0; i < k; ++i)
            if (mask & (1 << i)) s.push_back(i);
        const int m = static_cast<int>(s.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) kkt(i, j) = 2.0 * q(s[i], s[j]);
            kkt(i, m) = 1.0;
            kkt(m, i) = 1.0;
        }
        rhs(m) = 1.0;
        const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
        if (!((kkt * sol - rhs).norm() < 1e-9)) continue;
        Eigen::VectorXd p = Eigen::VectorXd::Zero(k);
        bool ok = true;
        for (int i = 0; i < m; ++i) {
            p(s[i]) = sol(i);
            if (sol(i) < -1e-12) ok = false;
        }
        if (!ok) continue;
        const double val = p.dot(q * p);
        if (val < best_val - 1e-15) {
            best_val = val;
            best = p;
        }
    }
    return best;
}

/// Quadratic form of the second Wu-Lin-Weng coupling objective.
inline Eigen::MatrixXd coupling_q(const Eigen::MatrixXd& r) {
    const int k = static_cast<int>(r.rows());
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            q(i, i) += r(j, i) * r(j, i);
            q(i, j) = -r(j, i) * r(i, j);
        }
    }
    return q;
}

}  // namespace oracle
