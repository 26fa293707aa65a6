#include "sarstv/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <string>
#include <unordered_map>

#include "sarstv/error.hpp"
#include "sarstv/parallel.hpp"
#include "sarstv/random.hpp"

namespace sarstv {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

double squared_distance(const double* a, const double* b, Eigen::Index d) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

// Rows of Q_ij = y_i y_j k(x_i, x_j), either fully materialized or held in
// an LRU cache when the full matrix exceeds the memory budget.
class KernelRows {
public:
    KernelRows(const SampleMatrix& x, std::span<const int> y, double gamma, std::size_t cache_mb)
        : y_(y), gamma_(gamma), l_(static_cast<int>(x.rows())), d_(x.cols()) {
        rows_ = x;  // row-major copy for contiguous feature access
        const std::size_t row_bytes = static_cast<std::size_t>(l_) * sizeof(double);
        const std::size_t budget = std::max<std::size_t>(cache_mb, 1) << 20;
        capacity_ = std::max<std::size_t>(2, budget / std::max<std::size_t>(row_bytes, 1));
        full_ = capacity_ >= static_cast<std::size_t>(l_);
        if (full_) {
            q_.resize(static_cast<std::size_t>(l_) * l_);
            for (int i = 0; i < l_; ++i) fill(i, q_.data() + static_cast<std::size_t>(i) * l_);
        }
    }

    const double* row(int i) {
        if (full_) return q_.data() + static_cast<std::size_t>(i) * l_;
        auto it = index_.find(i);
        if (it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second.data();
        }
        if (lru_.size() >= capacity_) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
        lru_.emplace_front(i, std::vector<double>(l_));
        fill(i, lru_.front().second.data());
        index_[i] = lru_.begin();
        return lru_.front().second.data();
    }

private:
    void fill(int i, double* out) const {
        const double* xi = rows_.data() + static_cast<std::size_t>(i) * d_;
        for (int j = 0; j < l_; ++j) {
            const double k = std::exp(-gamma_ * squared_distance(xi, rows_.data() + static_cast<std::size_t>(j) * d_, d_));
            out[j] = y_[i] * y_[j] * k;
        }
    }

    std::span<const int> y_;
    double gamma_;
    int l_;
    Eigen::Index d_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows_;
    bool full_ = false;
    std::size_t capacity_ = 0;
    std::vector<double> q_;
    std::list<std::pair<int, std::vector<double>>> lru_;
    std::unordered_map<int, std::list<std::pair<int, std::vector<double>>>::iterator> index_;
};

struct NuSolution {
    std::vector<double> alpha;  // unscaled, in [0, 1]
    double rho = 0.0;
    double r = 1.0;
    long iterations = 0;
    double violation = 0.0;
};

// SMO on the nu-dual
//   min 1/2 a^T Q a   s.t.  0 <= a_i <= 1,  sum_{y=+1} a_i = sum_{y=-1} a_i = nu*l/2.
// Both equality constraints force each working pair to share a class.
NuSolution solve_nu(const SampleMatrix& x, std::span<const int> y, double nu, const SvmParams& params) {
    const int l = static_cast<int>(x.rows());
    KernelRows q(x, y, params.gamma, params.cache_mb);

    NuSolution sol;
    auto& alpha = sol.alpha;
    alpha.assign(l, 0.0);
    double sum_pos = nu * l / 2.0;
    double sum_neg = nu * l / 2.0;
    for (int i = 0; i < l; ++i) {
        if (y[i] > 0) {
            alpha[i] = std::min(1.0, sum_pos);
            sum_pos -= alpha[i];
        } else {
            alpha[i] = std::min(1.0, sum_neg);
            sum_neg -= alpha[i];
        }
    }

    std::vector<double> grad(l, 0.0);
    for (int i = 0; i < l; ++i) {
        if (alpha[i] == 0.0) continue;
        const double* qi = q.row(i);
        for (int j = 0; j < l; ++j) grad[j] += alpha[i] * qi[j];
    }
    // RBF: k(x, x) = 1, so every diagonal entry of Q is 1.
    constexpr double qd = 1.0;
    auto upper = [&](int t) { return alpha[t] >= 1.0; };
    auto lower = [&](int t) { return alpha[t] <= 0.0; };

    long iter = 0;
    for (;; ++iter) {
        double gmaxp = -kInf, gmaxp2 = -kInf, gmaxn = -kInf, gmaxn2 = -kInf;
        int ip = -1, in = -1;
        for (int t = 0; t < l; ++t) {
            if (y[t] > 0) {
                if (!upper(t) && -grad[t] >= gmaxp) {
                    gmaxp = -grad[t];
                    ip = t;
                }
            } else if (!lower(t) && grad[t] >= gmaxn) {
                gmaxn = grad[t];
                in = t;
            }
        }
        const double* qip = ip >= 0 ? q.row(ip) : nullptr;
        const double* qin = in >= 0 ? q.row(in) : nullptr;

        int jmin = -1;
        double obj_min = kInf;
        for (int j = 0; j < l; ++j) {
            if (y[j] > 0) {
                if (lower(j)) continue;
                const double diff = gmaxp + grad[j];
                gmaxp2 = std::max(gmaxp2, grad[j]);
                if (diff > 0 && qip) {
                    const double quad = std::max(qd + qd - 2.0 * qip[j], kTau);
                    const double obj = -(diff * diff) / quad;
                    if (obj <= obj_min) {
                        jmin = j;
                        obj_min = obj;
                    }
                }
            } else {
                if (upper(j)) continue;
                const double diff = gmaxn - grad[j];
                gmaxn2 = std::max(gmaxn2, -grad[j]);
                if (diff > 0 && qin) {
                    const double quad = std::max(qd + qd - 2.0 * qin[j], kTau);
                    const double obj = -(diff * diff) / quad;
                    if (obj <= obj_min) {
                        jmin = j;
                        obj_min = obj;
                    }
                }
            }
        }

        sol.violation = std::max(gmaxp + gmaxp2, gmaxn + gmaxn2);
        if (sol.violation < params.tol || jmin < 0) break;
        if (iter >= params.max_iter) {
            throw ConvergenceError("nu-SVM SMO did not reach tolerance " + std::to_string(params.tol), iter);
        }

        const int i = y[jmin] > 0 ? ip : in;
        const int j = jmin;
        const double* qi = q.row(i);
        const double* qj = q.row(j);
        const double old_i = alpha[i];
        const double old_j = alpha[j];

        const double quad = std::max(qd + qd - 2.0 * qi[j], kTau);
        const double delta = (grad[i] - grad[j]) / quad;
        const double sum = alpha[i] + alpha[j];
        alpha[i] -= delta;
        alpha[j] += delta;
        if (sum > 1.0) {
            if (alpha[i] > 1.0) {
                alpha[i] = 1.0;
                alpha[j] = sum - 1.0;
            }
        } else if (alpha[j] < 0.0) {
            alpha[j] = 0.0;
            alpha[i] = sum;
        }
        if (sum > 1.0) {
            if (alpha[j] > 1.0) {
                alpha[j] = 1.0;
                alpha[i] = sum - 1.0;
            }
        } else if (alpha[i] < 0.0) {
            alpha[i] = 0.0;
            alpha[j] = sum;
        }

        const double di = alpha[i] - old_i;
        const double dj = alpha[j] - old_j;
        for (int k = 0; k < l; ++k) grad[k] += qi[k] * di + qj[k] * dj;
    }
    sol.iterations = iter;

    // rho and r from free variables of each class, or the midpoint of the
    // feasible gradient interval when a class has none.
    int nfree1 = 0, nfree2 = 0;
    double ub1 = kInf, ub2 = kInf, lb1 = -kInf, lb2 = -kInf, sfree1 = 0.0, sfree2 = 0.0;
    for (int t = 0; t < l; ++t) {
        if (y[t] > 0) {
            if (upper(t)) {
                lb1 = std::max(lb1, grad[t]);
            } else if (lower(t)) {
                ub1 = std::min(ub1, grad[t]);
            } else {
                ++nfree1;
                sfree1 += grad[t];
            }
        } else {
            if (upper(t)) {
                lb2 = std::max(lb2, grad[t]);
            } else if (lower(t)) {
                ub2 = std::min(ub2, grad[t]);
            } else {
                ++nfree2;
                sfree2 += grad[t];
            }
        }
    }
    auto finite_mid = [](double ub, double lb) {
        if (std::isfinite(ub) && std::isfinite(lb)) return 0.5 * (ub + lb);
        if (std::isfinite(ub)) return ub;
        if (std::isfinite(lb)) return lb;
        return 0.0;
    };
    const double r1 = nfree1 > 0 ? sfree1 / nfree1 : finite_mid(ub1, lb1);
    const double r2 = nfree2 > 0 ? sfree2 / nfree2 : finite_mid(ub2, lb2);
    sol.r = 0.5 * (r1 + r2);
    sol.rho = 0.5 * (r1 - r2);
    return sol;
}

BinaryModel train_binary_impl(const SampleMatrix& x, std::span<const int> y, const SvmParams& params, bool clip_nu);

// Decision values for held-out folds, as input to the Platt fit.
std::vector<double> cross_validated_decisions(const SampleMatrix& x, std::span<const int> y, const SvmParams& params) {
    const int l = static_cast<int>(x.rows());
    const int folds = std::max(2, std::min(params.probability_folds, l));
    std::vector<int> perm(l);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(params.seed);
    rng.partial_shuffle(std::span<int>(perm), perm.size());

    SvmParams sub = params;
    sub.probability = false;
    std::vector<double> dec(l, 0.0);
    for (int f = 0; f < folds; ++f) {
        const int begin = f * l / folds;
        const int end = (f + 1) * l / folds;
        std::vector<int> train_idx;
        for (int t = 0; t < l; ++t) {
            if (t < begin || t >= end) train_idx.push_back(perm[t]);
        }
        int pos = 0, neg = 0;
        for (int t : train_idx) (y[t] > 0 ? pos : neg)++;
        if (pos == 0 || neg == 0) {
            const double v = pos > 0 ? 1.0 : (neg > 0 ? -1.0 : 0.0);
            for (int t = begin; t < end; ++t) dec[perm[t]] = v;
            continue;
        }
        SampleMatrix xs(static_cast<Eigen::Index>(train_idx.size()), x.cols());
        std::vector<int> ys(train_idx.size());
        for (std::size_t t = 0; t < train_idx.size(); ++t) {
            xs.row(static_cast<Eigen::Index>(t)) = x.row(train_idx[t]);
            ys[t] = y[train_idx[t]];
        }
        const BinaryModel m = train_binary_impl(xs, ys, sub, true);
        for (int t = begin; t < end; ++t) {
            const Eigen::VectorXd row = x.row(perm[t]).transpose();
            dec[perm[t]] = m.decision_value(std::span<const double>(row.data(), row.size()));
        }
    }
    return dec;
}

BinaryModel train_binary_impl(const SampleMatrix& x, std::span<const int> y, const SvmParams& params, bool clip_nu) {
    params.validate();
    const int l = static_cast<int>(x.rows());
    if (static_cast<std::size_t>(l) != y.size()) throw InvalidArgument("train_binary: label count mismatch");
    int pos = 0, neg = 0;
    for (int v : y) {
        if (v == 1) {
            ++pos;
        } else if (v == -1) {
            ++neg;
        } else {
            throw InvalidArgument("train_binary: labels must be +1 or -1");
        }
    }
    if (pos == 0 || neg == 0) throw InvalidArgument("train_binary: both classes must be present");
    double nu = params.nu;
    const double nu_max = max_feasible_nu(y);
    if (nu > nu_max) {
        if (!clip_nu) {
            throw InvalidArgument("nu = " + std::to_string(nu) + " is infeasible; at most " + std::to_string(nu_max) +
                                  " for this class balance");
        }
        nu = nu_max;
    }

    const NuSolution sol = solve_nu(x, y, nu, params);
    const double r = sol.r > 1e-12 ? sol.r : 1.0;

    BinaryModel m;
    m.gamma = params.gamma;
    m.rho = sol.rho / r;
    m.iterations = sol.iterations;
    m.max_violation = sol.violation;
    m.margin_scale = sol.r;
    for (int i = 0; i < l; ++i) {
        if (sol.alpha[i] > 0.0) {
            m.support.push_back(i);
            m.coef.push_back(sol.alpha[i] * y[i] / r);
            if (sol.alpha[i] >= 1.0) ++m.bounded_support;
        }
    }
    m.support_vectors.resize(static_cast<Eigen::Index>(m.support.size()), x.cols());
    for (std::size_t s = 0; s < m.support.size(); ++s) m.support_vectors.row(static_cast<Eigen::Index>(s)) = x.row(m.support[s]);

    if (params.probability) {
        const auto dec = cross_validated_decisions(x, y, params);
        std::tie(m.platt_a, m.platt_b) = fit_platt(dec, y);
        m.has_probability = true;
    }
    return m;
}

}  // namespace

void SvmParams::validate() const {
    if (!(nu > 0.0 && nu <= 1.0)) throw InvalidArgument("nu must lie in (0, 1]");
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    if (!(tol > 0.0)) throw InvalidArgument("SMO tolerance must be positive");
    if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
    if (probability && probability_folds < 2) throw InvalidArgument("probability_folds must be >= 2");
}

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
    if (x.size() != y.size()) throw InvalidArgument("rbf_kernel: length mismatch");
    return std::exp(-gamma * squared_distance(x.data(), y.data(), static_cast<Eigen::Index>(x.size())));
}

double BinaryModel::decision_value(std::span<const double> x) const {
    if (static_cast<Eigen::Index>(x.size()) != support_vectors.cols() && !support.empty()) {
        throw InvalidArgument("decision_value: feature dimension mismatch");
    }
    double sum = 0.0;
    for (std::size_t s = 0; s < coef.size(); ++s) {
        const Eigen::VectorXd sv = support_vectors.row(static_cast<Eigen::Index>(s)).transpose();
        sum += coef[s] * std::exp(-gamma * squared_distance(sv.data(), x.data(), sv.size()));
    }
    return sum - rho;
}

double BinaryModel::probability(double decision) const {
    const double f = decision * platt_a + platt_b;
    return f >= 0 ? std::exp(-f) / (1.0 + std::exp(-f)) : 1.0 / (1.0 + std::exp(f));
}

double max_feasible_nu(std::span<const int> y) {
    int pos = 0, neg = 0;
    for (int v : y) (v > 0 ? pos : neg)++;
    if (y.empty()) return 0.0;
    return 2.0 * std::min(pos, neg) / static_cast<double>(y.size());
}

BinaryModel train_binary(const SampleMatrix& x, std::span<const int> y, const SvmParams& params) {
    return train_binary_impl(x, y, params, false);
}

std::pair<double, double> fit_platt(std::span<const double> dec, std::span<const int> y) {
    const std::size_t l = dec.size();
    double prior1 = 0, prior0 = 0;
    for (int v : y) (v > 0 ? prior1 : prior0) += 1;
    constexpr int max_iter = 100;
    constexpr double min_step = 1e-10, sigma = 1e-12, eps = 1e-5;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);
    std::vector<double> t(l);
    for (std::size_t i = 0; i < l; ++i) t[i] = y[i] > 0 ? hi : lo;

    auto objective = [&](double a, double b) {
        double f = 0.0;
        for (std::size_t i = 0; i < l; ++i) {
            const double z = dec[i] * a + b;
            f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return f;
    };

    double a = 0.0;
    double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = objective(a, b);
    for (int iter = 0; iter < max_iter; ++iter) {
        double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < l; ++i) {
            const double z = dec[i] * a + b;
            double p, q;
            if (z >= 0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += dec[i] * dec[i] * d2;
            h22 += d2;
            h21 += dec[i] * d2;
            const double d1 = t[i] - p;
            g1 += dec[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= min_step) {
            const double na = a + step * da;
            const double nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < min_step) break;
    }
    return {a, b};
}

CouplingResult couple_probabilities_iterate(const Eigen::MatrixXd& r, double tol, int max_iter) {
    const Eigen::Index k = r.rows();
    if (k < 2 || r.cols() != k) throw InvalidArgument("couple_probabilities: need a square matrix with K >= 2");
    Eigen::MatrixXd q(k, k);
    for (Eigen::Index t = 0; t < k; ++t) {
        q(t, t) = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (j == t) continue;
            q(t, t) += r(j, t) * r(j, t);
            q(t, j) = -r(j, t) * r(t, j);
        }
    }

    CouplingResult res;
    res.p = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    Eigen::VectorXd qp(k);
    for (int iter = 0; iter < max_iter; ++iter) {
        qp = q * res.p;
        double pqp = res.p.dot(qp);
        double max_error = 0.0;
        for (Eigen::Index t = 0; t < k; ++t) max_error = std::max(max_error, std::abs(qp[t] - pqp));
        if (max_error < tol) {
            res.converged = true;
            res.iterations = iter;
            return res;
        }
        for (Eigen::Index t = 0; t < k; ++t) {
            const double diff = (-qp[t] + pqp) / q(t, t);
            res.p[t] += diff;
            pqp = (pqp + diff * (diff * q(t, t) + 2.0 * qp[t])) / (1.0 + diff) / (1.0 + diff);
            for (Eigen::Index j = 0; j < k; ++j) {
                qp[j] = (qp[j] + diff * q(t, j)) / (1.0 + diff);
                res.p[j] /= (1.0 + diff);
            }
        }
    }
    res.iterations = max_iter;
    return res;
}

Eigen::VectorXd couple_probabilities(const Eigen::MatrixXd& pairwise, double tol, int max_iter) {
    for (Eigen::Index i = 0; i < pairwise.rows(); ++i) {
        for (Eigen::Index j = 0; j < pairwise.cols(); ++j) {
            if (i == j) continue;
            const double v = pairwise(i, j);
            if (!(v > 0.0 && v < 1.0)) throw InvalidArgument("couple_probabilities: r_ij must lie in (0, 1)");
        }
    }
    auto res = couple_probabilities_iterate(pairwise, tol, max_iter);
    if (!res.converged) throw ConvergenceError("probability coupling did not converge", res.iterations);
    return res.p;
}

namespace {

std::vector<PairModel> train_pairs(const SampleMatrix& x, std::span<const int> y, int classes, const SvmParams& params,
                                   bool clip_nu) {
    if (classes < 2) throw InvalidArgument("multiclass training needs K >= 2");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw InvalidArgument("train_multiclass: label count mismatch");
    std::vector<std::vector<int>> members(classes + 1);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 1 || y[i] > classes) throw InvalidArgument("class label out of range: " + std::to_string(y[i]));
        members[y[i]].push_back(static_cast<int>(i));
    }
    for (int k = 1; k <= classes; ++k) {
        if (members[k].empty()) throw InvalidArgument("class " + std::to_string(k) + " has no training samples");
    }

    std::vector<PairModel> models;
    for (int a = 1; a <= classes; ++a) {
        for (int b = a + 1; b <= classes; ++b) models.push_back({a, b, {}});
    }
    parallel_for(models.size(), [&](std::size_t p) {
        auto& pm = models[p];
        const auto& ia = members[pm.first];
        const auto& ib = members[pm.second];
        SampleMatrix xs(static_cast<Eigen::Index>(ia.size() + ib.size()), x.cols());
        std::vector<int> ys;
        std::vector<int> origin;
        for (int i : ia) {
            xs.row(static_cast<Eigen::Index>(ys.size())) = x.row(i);
            ys.push_back(1);
            origin.push_back(i);
        }
        for (int i : ib) {
            xs.row(static_cast<Eigen::Index>(ys.size())) = x.row(i);
            ys.push_back(-1);
            origin.push_back(i);
        }
        SvmParams pp = params;
        pp.seed = derive_seed(params.seed, p);
        try {
            pm.model = train_binary_impl(xs, ys, pp, clip_nu);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError("pair (" + std::to_string(pm.first) + "," + std::to_string(pm.second) + "): " +
                                       e.what(),
                                   e.iterations());
        } catch (const Error& e) {
            throw Error("pair (" + std::to_string(pm.first) + "," + std::to_string(pm.second) + "): " + e.what());
        }
        for (int& s : pm.model.support) s = origin[s];
    });
    return models;
}

}  // namespace

std::vector<PairModel> train_multiclass(const SampleMatrix& x, std::span<const int> y, int classes,
                                        const SvmParams& params) {
    return train_pairs(x, y, classes, params, false);
}

int predict_vote(const std::vector<PairModel>& models, int classes, std::span<const double> x) {
    std::vector<int> votes(classes + 1, 0);
    for (const auto& pm : models) ++votes[pm.model.decision_value(x) > 0 ? pm.first : pm.second];
    int best = 1;
    for (int k = 2; k <= classes; ++k) {
        if (votes[k] > votes[best]) best = k;
    }
    return best;
}

CvResult cross_validate(const SampleMatrix& x, std::span<const int> y, int classes, const SvmGrid& grid, int folds,
                        std::uint64_t seed, const SvmParams& base) {
    if (grid.nu.empty() || grid.gamma.empty()) throw InvalidArgument("cross_validate: empty parameter grid");
    std::vector<std::vector<int>> members(classes + 1);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 1 || y[i] > classes) throw InvalidArgument("class label out of range: " + std::to_string(y[i]));
        members[y[i]].push_back(static_cast<int>(i));
    }
    std::size_t min_count = std::numeric_limits<std::size_t>::max();
    for (int k = 1; k <= classes; ++k) min_count = std::min(min_count, members[k].size());
    if (min_count < 2) throw InvalidArgument("cross_validate: every class needs at least two samples");
    folds = static_cast<int>(std::min<std::size_t>(std::max(folds, 2), min_count));

    // Stratified assignment: each class is shuffled, then dealt round-robin.
    std::vector<int> fold_of(y.size(), 0);
    Rng rng(seed);
    for (int k = 1; k <= classes; ++k) {
        auto idx = members[k];
        rng.partial_shuffle(std::span<int>(idx), idx.size());
        for (std::size_t t = 0; t < idx.size(); ++t) fold_of[idx[t]] = static_cast<int>(t % folds);
    }

    std::vector<double> nus = grid.nu;
    std::vector<double> gammas = grid.gamma;
    std::sort(nus.begin(), nus.end());
    std::sort(gammas.begin(), gammas.end());

    CvResult result;
    result.folds = folds;
    result.accuracy.assign(nus.size() * gammas.size(), 0.0);
    parallel_for(result.accuracy.size(), [&](std::size_t g) {
        SvmParams p = base;
        p.nu = nus[g / gammas.size()];
        p.gamma = gammas[g % gammas.size()];
        p.probability = false;
        double acc_sum = 0.0;
        for (int f = 0; f < folds; ++f) {
            std::vector<int> tr, te;
            for (std::size_t i = 0; i < y.size(); ++i) (fold_of[i] == f ? te : tr).push_back(static_cast<int>(i));
            SampleMatrix xt(static_cast<Eigen::Index>(tr.size()), x.cols());
            std::vector<int> yt(tr.size());
            for (std::size_t i = 0; i < tr.size(); ++i) {
                xt.row(static_cast<Eigen::Index>(i)) = x.row(tr[i]);
                yt[i] = y[tr[i]];
            }
            int correct = 0;
            try {
                const auto models = train_pairs(xt, yt, classes, p, true);
                for (int i : te) {
                    const Eigen::VectorXd row = x.row(i).transpose();
                    if (predict_vote(models, classes, std::span<const double>(row.data(), row.size())) == y[i]) ++correct;
                }
            } catch (const ConvergenceError&) {
                correct = 0;  // grid point scores zero on this fold
            }
            acc_sum += static_cast<double>(correct) / static_cast<double>(te.size());
        }
        result.accuracy[g] = acc_sum / folds;
    });

    // gamma ascending outer, nu ascending inner: a strict improvement is
    // needed to move, so ties keep the smaller gamma, then the smaller nu.
    double best = -1.0;
    for (std::size_t j = 0; j < gammas.size(); ++j) {
        for (std::size_t i = 0; i < nus.size(); ++i) {
            const double acc = result.accuracy[i * gammas.size() + j];
            if (acc > best + 1e-12) {
                best = acc;
                result.best = base;
                result.best.nu = nus[i];
                result.best.gamma = gammas[j];
            }
        }
    }
    result.best_accuracy = best;
    return result;
}

Standardizer Standardizer::fit(const SampleMatrix& x) {
    Standardizer s;
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double var = x.rows() > 1 ? (x.col(j).array() - s.mean[j]).square().sum() / static_cast<double>(x.rows() - 1) : 0.0;
        s.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
}

SampleMatrix Standardizer::apply(const SampleMatrix& x) const {
    SampleMatrix out = x.rowwise() - mean.transpose();
    return out.array().rowwise() / scale.transpose().array();
}

void Standardizer::apply_inplace(std::span<double> x) const {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - mean[static_cast<Eigen::Index>(j)]) / scale[static_cast<Eigen::Index>(j)];
}

SvmClassifier train_classifier(const SampleMatrix& x, std::span<const int> y, int classes, const SvmParams& params) {
    SvmClassifier clf;
    clf.classes = classes;
    clf.scaler = Standardizer::fit(x);
    clf.samples = clf.scaler.apply(x);
    clf.labels.assign(y.begin(), y.end());
    clf.params = params;
    clf.models = train_multiclass(clf.samples, y, classes, params);
    return clf;
}

namespace {

// Support vectors of all pairwise models, shared so each pixel evaluates a
// kernel against a training sample at most once.
struct SharedSupport {
    std::vector<int> samples;         // distinct training rows in use
    std::vector<int> slot_of_sample;  // training row -> slot, -1 if unused
};

SharedSupport shared_support(const SvmClassifier& clf) {
    SharedSupport s;
    s.slot_of_sample.assign(static_cast<std::size_t>(clf.samples.rows()), -1);
    for (const auto& pm : clf.models) {
        for (int idx : pm.model.support) {
            if (s.slot_of_sample[idx] < 0) {
                s.slot_of_sample[idx] = static_cast<int>(s.samples.size());
                s.samples.push_back(idx);
            }
        }
    }
    return s;
}

Eigen::VectorXd probabilities_from_kernel(const SvmClassifier& clf, const SharedSupport& shared,
                                          std::span<const double> kvals) {
    const int k = clf.classes;
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(k, k);
    for (const auto& pm : clf.models) {
        double dec = -pm.model.rho;
        for (std::size_t s = 0; s < pm.model.support.size(); ++s) {
            dec += pm.model.coef[s] * kvals[shared.slot_of_sample[pm.model.support[s]]];
        }
        const double prob = std::clamp(pm.model.probability(dec), 1e-7, 1.0 - 1e-7);
        r(pm.first - 1, pm.second - 1) = prob;
        r(pm.second - 1, pm.first - 1) = 1.0 - prob;
    }
    // A pixel never aborts prediction: the last iterate is kept if the cap is hit.
    auto res = couple_probabilities_iterate(r, 1e-10, 10000);
    Eigen::VectorXd p = res.p.cwiseMax(0.0);
    return p / p.sum();
}

void check_probability_models(const SvmClassifier& clf) {
    for (const auto& pm : clf.models) {
        if (!pm.model.has_probability) throw InvalidArgument("classifier was trained without probability estimates");
    }
}

}  // namespace

Eigen::VectorXd predict_probabilities(const SvmClassifier& clf, std::span<const double> x) {
    if (static_cast<int>(x.size()) != clf.features()) throw InvalidArgument("predict: feature dimension mismatch");
    check_probability_models(clf);
    const auto shared = shared_support(clf);
    std::vector<double> z(x.begin(), x.end());
    clf.scaler.apply_inplace(z);
    std::vector<double> kvals(shared.samples.size());
    for (std::size_t s = 0; s < shared.samples.size(); ++s) {
        const Eigen::VectorXd sv = clf.samples.row(shared.samples[s]).transpose();
        kvals[s] = std::exp(-clf.params.gamma * squared_distance(sv.data(), z.data(), sv.size()));
    }
    return probabilities_from_kernel(clf, shared, kvals);
}

ProbabilityTensor predict_prob_tensor(const SvmClassifier& clf, const Cube& reduced) {
    if (reduced.bands() != clf.features()) {
        throw InvalidArgument("predict_prob_tensor: cube has " + std::to_string(reduced.bands()) +
                              " bands, classifier expects " + std::to_string(clf.features()));
    }
    check_probability_models(clf);
    const auto shared = shared_support(clf);
    const int d = clf.features();
    std::vector<double> sv(shared.samples.size() * d);
    for (std::size_t s = 0; s < shared.samples.size(); ++s) {
        for (int j = 0; j < d; ++j) sv[s * d + j] = clf.samples(shared.samples[s], j);
    }

    ProbabilityTensor out(reduced.height(), reduced.width(), clf.classes);
    parallel_for(static_cast<std::size_t>(reduced.height()), [&](std::size_t row) {
        std::vector<double> z(d);
        std::vector<double> kvals(shared.samples.size());
        for (int col = 0; col < reduced.width(); ++col) {
            for (int j = 0; j < d; ++j) z[j] = reduced.at(static_cast<int>(row), col, j);
            clf.scaler.apply_inplace(z);
            for (std::size_t s = 0; s < shared.samples.size(); ++s) {
                kvals[s] = std::exp(-clf.params.gamma * squared_distance(sv.data() + s * d, z.data(), d));
            }
            const Eigen::VectorXd p = probabilities_from_kernel(clf, shared, kvals);
            for (int k = 0; k < clf.classes; ++k) out.at(static_cast<int>(row), col, k) = p[k];
        }
    });
    return out;
}

}  // namespace sarstv
