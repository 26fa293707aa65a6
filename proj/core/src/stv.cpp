#include "sarstv/stv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sarstv/cg.hpp"
#include "sarstv/error.hpp"
#include "sarstv/parallel.hpp"

namespace sarstv {

namespace {

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

void check_same_shape(const Plane& a, const Plane& b, const char* what) {
    if (a.height != b.height || a.width != b.width) throw InvalidArgument(std::string(what) + ": shape mismatch");
}

}  // namespace

Plane::Plane(int h, int w, std::vector<double> v) : height(h), width(w), values(std::move(v)) {
    if (values.size() != static_cast<std::size_t>(h) * w) throw InvalidArgument("plane payload size mismatch");
}

void StvParams::validate() const {
    if (!(beta1 >= 0.0) || !(beta2 >= 0.0)) throw InvalidArgument("beta1 and beta2 must be nonnegative");
    if (!(penalty() > 0.0)) throw InvalidArgument("ADMM penalty rho must be positive");
    if (!(tol > 0.0)) throw InvalidArgument("STV tolerance must be positive");
    if (max_iter < 1) throw InvalidArgument("STV max_iter must be >= 1");
    if (!(cg_tol > 0.0) || cg_max_iter < 1) throw InvalidArgument("invalid CG settings");
}

std::optional<StvParams> stv_preset(std::string_view dataset) {
    StvParams p;
    p.beta1 = 0.2;
    if (dataset == "indian_pines") {
        p.beta2 = 4.0;
        return p;
    }
    if (dataset == "pavia_u") {
        p.beta2 = 1.0;
        return p;
    }
    return std::nullopt;
}

FixedMask FixedMask::none(int height, int width) {
    return {height, width, std::vector<unsigned char>(static_cast<std::size_t>(height) * width, 0)};
}

FixedMask FixedMask::from_training(const TrainingSet& set, int height, int width) {
    for (const auto& s : set.samples) {
        if (s.row < 0 || s.row >= height || s.col < 0 || s.col >= width) {
            throw InvalidArgument("training pixel outside the image");
        }
    }
    return {height, width, set.mask(height, width)};
}

std::size_t FixedMask::count() const {
    return static_cast<std::size_t>(std::count(fixed.begin(), fixed.end(), 1));
}

GradientField grad(const Plane& u) {
    GradientField g{Plane(u.height, u.width), Plane(u.height, u.width)};
    for (int r = 0; r < u.height; ++r) {
        for (int c = 0; c < u.width; ++c) {
            if (r + 1 < u.height) g.drow.at(r, c) = u.at(r + 1, c) - u.at(r, c);
            if (c + 1 < u.width) g.dcol.at(r, c) = u.at(r, c + 1) - u.at(r, c);
        }
    }
    return g;
}

Plane div(const GradientField& g) {
    check_same_shape(g.drow, g.dcol, "div");
    const int h = g.drow.height;
    const int w = g.drow.width;
    Plane out(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double v = 0.0;
            if (r + 1 < h) v += g.drow.at(r, c);
            if (r > 0) v -= g.drow.at(r - 1, c);
            if (c + 1 < w) v += g.dcol.at(r, c);
            if (c > 0) v -= g.dcol.at(r, c - 1);
            out.at(r, c) = v;
        }
    }
    return out;
}

GradientField shrink(const GradientField& g, double t) {
    if (t < 0.0) throw InvalidArgument("shrink threshold must be nonnegative");
    GradientField out = g;
    auto soft = [t](double x) { return x > t ? x - t : (x < -t ? x + t : 0.0); };
    for (double& x : out.drow.values) x = soft(x);
    for (double& x : out.dcol.values) x = soft(x);
    return out;
}

GradientField shrink_isotropic(const GradientField& g, double t) {
    if (t < 0.0) throw InvalidArgument("shrink threshold must be nonnegative");
    GradientField out = g;
    for (std::size_t i = 0; i < out.drow.values.size(); ++i) {
        const double a = out.drow.values[i];
        const double b = out.dcol.values[i];
        const double mag = std::sqrt(a * a + b * b);
        const double scale = mag > t ? (mag - t) / mag : 0.0;
        out.drow.values[i] = a * scale;
        out.dcol.values[i] = b * scale;
    }
    return out;
}

double stv_objective(const Plane& u, const Plane& v, const StvParams& params) {
    check_same_shape(u, v, "stv_objective");
    double fidelity = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u.values[i] - v.values[i];
        fidelity += d * d;
    }
    const auto g = grad(u);
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = g.drow.values[i];
        const double b = g.dcol.values[i];
        l1 += params.isotropic ? std::sqrt(a * a + b * b) : std::abs(a) + std::abs(b);
        l2 += a * a + b * b;
    }
    return 0.5 * fidelity + params.beta1 * l1 + 0.5 * params.beta2 * l2;
}

StvResult stv_denoise_channel(const Plane& v, const StvParams& params, const FixedMask& fixed) {
    params.validate();
    if (fixed.height != v.height || fixed.width != v.width || fixed.fixed.size() != v.size()) {
        throw InvalidArgument("fixed mask does not match the channel");
    }
    const double rho = params.penalty();
    const double coupling = params.beta2 + rho;
    const double threshold = params.beta1 / rho;
    const double vnorm = norm2(v.values);
    const double floor = 1e-3 * vnorm + std::numeric_limits<double>::min();

    StvResult res;
    res.u = v;
    GradientField d = grad(v);
    GradientField b{Plane(v.height, v.width), Plane(v.height, v.width)};

    // (I + coupling * L) x with L = -div grad.
    // L is the 5-point graph Laplacian with Neumann boundary: each pixel
    // contributes (x_p - x_q) for every in-bounds 4-neighbour q.
    const int h = v.height;
    const int w = v.width;
    auto apply = [&](std::span<const double> x, std::span<double> out) {
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const std::size_t i = static_cast<std::size_t>(r) * w + c;
                double lap = 0.0;
                if (r > 0) lap += x[i] - x[i - w];
                if (r + 1 < h) lap += x[i] - x[i + w];
                if (c > 0) lap += x[i] - x[i - 1];
                if (c + 1 < w) lap += x[i] - x[i + 1];
                out[i] = x[i] + coupling * lap;
            }
        }
    };

    for (res.iterations = 1; res.iterations <= params.max_iter; ++res.iterations) {
        GradientField diff = d;
        for (std::size_t i = 0; i < v.size(); ++i) {
            diff.drow.values[i] -= b.drow.values[i];
            diff.dcol.values[i] -= b.dcol.values[i];
        }
        const Plane dv = div(diff);
        std::vector<double> rhs(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) rhs[i] = v.values[i] - rho * dv.values[i];

        const auto cg = conjugate_gradient(apply, std::span<const double>(rhs), std::span<double>(res.u.values),
                                           params.cg_tol, params.cg_max_iter);
        res.cg_iterations += cg.iterations;
        if (!cg.converged) {
            throw ConvergenceError("STV u-step CG stalled at relative residual " + std::to_string(cg.relative_residual),
                                   cg.iterations);
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (fixed.fixed[i]) res.u.values[i] = v.values[i];
        }

        const GradientField gu = grad(res.u);
        GradientField target = gu;
        for (std::size_t i = 0; i < v.size(); ++i) {
            target.drow.values[i] += b.drow.values[i];
            target.dcol.values[i] += b.dcol.values[i];
        }
        GradientField d_next = params.isotropic ? shrink_isotropic(target, threshold) : shrink(target, threshold);

        double primal_sq = 0.0, gu_sq = 0.0, d_sq = 0.0;
        GradientField delta = d_next;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double pr = gu.drow.values[i] - d_next.drow.values[i];
            const double pc = gu.dcol.values[i] - d_next.dcol.values[i];
            primal_sq += pr * pr + pc * pc;
            gu_sq += gu.drow.values[i] * gu.drow.values[i] + gu.dcol.values[i] * gu.dcol.values[i];
            d_sq += d_next.drow.values[i] * d_next.drow.values[i] + d_next.dcol.values[i] * d_next.dcol.values[i];
            b.drow.values[i] += pr;
            b.dcol.values[i] += pc;
            delta.drow.values[i] -= d.drow.values[i];
            delta.dcol.values[i] -= d.dcol.values[i];
        }
        d = std::move(d_next);

        const double dual = rho * norm2(div(delta).values);
        const double dual_scale = rho * norm2(div(b).values) + floor;
        const double primal_scale = std::max(std::sqrt(gu_sq), std::sqrt(d_sq)) + floor;
        res.primal_residual = std::sqrt(primal_sq) / primal_scale;
        res.dual_residual = dual / dual_scale;
        if (res.primal_residual <= params.tol && res.dual_residual <= params.tol) {
            res.converged = true;
            break;
        }
    }
    res.iterations = std::min(res.iterations, params.max_iter);
    return res;
}

StvTensorResult stv_denoise_tensor(const ProbabilityTensor& v, const StvParams& params, const FixedMask& fixed) {
    params.validate();
    StvTensorResult out;
    out.u = ProbabilityTensor(v.height(), v.width(), v.classes());
    out.channels.resize(v.classes());
    parallel_for(static_cast<std::size_t>(v.classes()), [&](std::size_t k) {
        const auto ch = v.channel(static_cast<int>(k));
        const Plane plane(v.height(), v.width(), std::vector<double>(ch.begin(), ch.end()));
        StvResult r = stv_denoise_channel(plane, params, fixed);
        std::copy(r.u.values.begin(), r.u.values.end(), out.u.channel(static_cast<int>(k)).begin());
        r.u = Plane();
        out.channels[k] = std::move(r);
    });
    for (const auto& c : out.channels) {
        if (!c.converged) ++out.unconverged_channels;
    }
    return out;
}

}  // namespace sarstv
