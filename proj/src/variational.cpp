#include "twistlab/variational.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "twistlab/linalg.hpp"

namespace twistlab::variational {

std::pair<Vec, Vec> Configuration::transition(int i) const {
    const int n_pts = static_cast<int>(points.size());
    if (boundary == Boundary::FixedEnds) return {points[i], points[i + 1]};
    if (i + 1 < n_pts) return {points[i], points[i + 1]};
    return {points[n_pts - 1], points[0] + rotation};
}

double action(const GeneratingFunction& s, const Configuration& config, double lbar) {
    double total = 0.0;
    const int m = config.segment_count();
    for (int i = 0; i < m; ++i) {
        auto [a, b] = config.transition(i);
        total += s.eval(a, b);
    }
    return total - m * lbar;
}

namespace {

int free_count(const Configuration& c) {
    return c.boundary == Configuration::Boundary::FixedEnds ? static_cast<int>(c.points.size()) - 2
                                                            : static_cast<int>(c.points.size());
}

/// Index of point j among the free variables, or -1 when clamped.
int free_index(const Configuration& c, int j) {
    if (c.boundary == Configuration::Boundary::Periodic) return j % static_cast<int>(c.points.size());
    if (j <= 0 || j >= static_cast<int>(c.points.size()) - 1) return -1;
    return j - 1;
}

}  // namespace

Vec action_gradient(const GeneratingFunction& s, const Configuration& config) {
    const int n = s.dim();
    const int nf = free_count(config);
    Vec g = Vec::Zero(nf * n);
    const int m = config.segment_count();
    for (int i = 0; i < m; ++i) {
        auto [a, b] = config.transition(i);
        int ia = free_index(config, i);
        int ib = free_index(config, i + 1);
        if (ia >= 0) g.segment(ia * n, n) += s.grad_q(a, b);
        if (ib >= 0) g.segment(ib * n, n) += s.grad_Q(a, b);
    }
    return g;
}

Mat action_hessian(const GeneratingFunction& s, const Configuration& config) {
    const int n = s.dim();
    const int nf = free_count(config);
    Mat h = Mat::Zero(nf * n, nf * n);
    const int m = config.segment_count();
    for (int i = 0; i < m; ++i) {
        auto [a, b] = config.transition(i);
        int ia = free_index(config, i);
        int ib = free_index(config, i + 1);
        Mat hqq = s.hess_qq(a, b);
        Mat hqQ = s.hess_qQ(a, b);
        Mat hQQ = s.hess_QQ(a, b);
        if (ia >= 0) h.block(ia * n, ia * n, n, n) += hqq;
        if (ib >= 0) h.block(ib * n, ib * n, n, n) += hQQ;
        if (ia >= 0 && ib >= 0) {
            h.block(ia * n, ib * n, n, n) += hqQ;
            h.block(ib * n, ia * n, n, n) += hqQ.transpose();
        }
    }
    return h;
}

namespace {

/// Solves the block-tridiagonal system assembled in `h` (band verified by the
/// caller) by block LU; falls back to dense LU when a pivot block degenerates.
Vec solve_newton_system(const Mat& h, const Vec& rhs, int n, bool tridiagonal) {
    if (!tridiagonal || h.rows() <= n) {
        Eigen::PartialPivLU<Mat> lu(h);
        Vec d = lu.solve(rhs);
        if (d.allFinite()) return d;
        Mat reg = h + 1e-10 * Mat::Identity(h.rows(), h.cols());
        return reg.partialPivLu().solve(rhs);
    }
    const int blocks = static_cast<int>(h.rows()) / n;
    std::vector<Mat> diag(blocks);
    std::vector<Vec> r(blocks);
    // Forward block elimination.
    diag[0] = h.block(0, 0, n, n);
    r[0] = rhs.segment(0, n);
    for (int i = 1; i < blocks; ++i) {
        Mat lower = h.block(i * n, (i - 1) * n, n, n);
        Mat upper = h.block((i - 1) * n, i * n, n, n);
        Eigen::PartialPivLU<Mat> lu(diag[i - 1]);
        if (std::abs(lu.determinant()) < 1e-300) {
            Mat reg = h + 1e-10 * Mat::Identity(h.rows(), h.cols());
            return reg.partialPivLu().solve(rhs);
        }
        Mat gain = lower * lu.inverse();
        diag[i] = h.block(i * n, i * n, n, n) - gain * upper;
        r[i] = rhs.segment(i * n, n) - gain * r[i - 1];
    }
    Vec x(h.rows());
    x.segment((blocks - 1) * n, n) = diag[blocks - 1].partialPivLu().solve(r[blocks - 1]);
    for (int i = blocks - 2; i >= 0; --i) {
        Mat upper = h.block(i * n, (i + 1) * n, n, n);
        x.segment(i * n, n) = diag[i].partialPivLu().solve(r[i] - upper * x.segment((i + 1) * n, n));
    }
    return x;
}

void scatter_free(Configuration& c, const Vec& z, int n) {
    const int nf = free_count(c);
    for (int i = 0; i < nf; ++i) {
        int j = (c.boundary == Configuration::Boundary::FixedEnds) ? i + 1 : i;
        c.points[j] = z.segment(i * n, n);
    }
}

Vec gather_free(const Configuration& c, int n) {
    const int nf = free_count(c);
    Vec z(nf * n);
    for (int i = 0; i < nf; ++i) {
        int j = (c.boundary == Configuration::Boundary::FixedEnds) ? i + 1 : i;
        z.segment(i * n, n) = c.points[j];
    }
    return z;
}

MinimizeResult newton_minimize(const GeneratingFunction& s, Configuration config,
                               const MinimizeOptions& opts) {
    const int n = s.dim();
    const bool tridiag = config.boundary == Configuration::Boundary::FixedEnds;
    MinimizeResult res;
    if (free_count(config) == 0) {
        res.config = config;
        res.converged = true;
        res.value = action(s, config, 0.0);
        return res;
    }
    Vec g = action_gradient(s, config);
    double val = action(s, config, 0.0);
    int it = 0;
    for (; it < opts.max_iters && g.norm() > opts.grad_tol; ++it) {
        Mat h = action_hessian(s, config);
        Vec step = solve_newton_system(h, -g, n, tridiag);
        if (!step.allFinite()) break;
        // Keep the Newton step a descent move: halve until the residual or the
        // action improves.
        Vec z0 = gather_free(config, n);
        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half < 45; ++half) {
            Configuration trial = config;
            scatter_free(trial, z0 + t * step, n);
            Vec g_try = action_gradient(s, trial);
            double val_try = action(s, trial, 0.0);
            if (g_try.norm() < g.norm() || val_try < val - 1e-14 * std::abs(val)) {
                config = trial;
                g = g_try;
                val = val_try;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // Gradient fallback with backtracking on the action.
            double tau = 1.0 / std::max(1.0, g.norm());
            bool moved = false;
            for (int half = 0; half < 45; ++half) {
                Configuration trial = config;
                scatter_free(trial, z0 - tau * g, n);
                double val_try = action(s, trial, 0.0);
                if (val_try < val) {
                    config = trial;
                    g = action_gradient(s, config);
                    val = val_try;
                    moved = true;
                    break;
                }
                tau *= 0.5;
            }
            if (!moved) break;
        }
    }
    res.config = config;
    res.grad_norm = g.norm();
    res.value = val;
    res.iters = it;
    res.converged = res.grad_norm <= opts.grad_tol;
    if (res.converged) {
        Mat h = action_hessian(s, config);
        Vec ev = linalg::sym_eigenvalues(h);
        double scale = std::max(1.0, std::abs(ev.maxCoeff()));
        res.saddle = ev.minCoeff() < -1e-8 * scale;
    }
    return res;
}

MinimizeResult best_of_starts(const GeneratingFunction& s, const std::vector<Configuration>& starts,
                              const MinimizeOptions& opts) {
    std::vector<MinimizeResult> results(starts.size());
    if (starts.size() > 2) {
        std::vector<std::future<MinimizeResult>> futs;
        futs.reserve(starts.size());
        for (const auto& c : starts)
            futs.push_back(std::async(std::launch::async, [&s, c, &opts] { return newton_minimize(s, c, opts); }));
        for (std::size_t i = 0; i < futs.size(); ++i) results[i] = futs[i].get();
    } else {
        for (std::size_t i = 0; i < starts.size(); ++i) results[i] = newton_minimize(s, starts[i], opts);
    }
    // Merge by value: genuine minima first, then saddles, then best effort.
    int best = -1;
    auto better = [&](const MinimizeResult& a, const MinimizeResult& b) {
        auto rank = [](const MinimizeResult& r) { return r.converged ? (r.saddle ? 1 : 0) : 2; };
        if (rank(a) != rank(b)) return rank(a) < rank(b);
        return a.value < b.value;
    };
    for (std::size_t i = 0; i < results.size(); ++i)
        if (best < 0 || better(results[i], results[static_cast<std::size_t>(best)]))
            best = static_cast<int>(i);
    MinimizeResult res = results[static_cast<std::size_t>(best)];
    if (!res.converged) throw NotConverged("action minimization did not converge from any start");
    return res;
}

}  // namespace

MinimizeResult minimize_fixed_ends(const GeneratingFunction& s, const Vec& q_start, const Vec& q_end,
                                   int k, const std::optional<Configuration>& init,
                                   const MinimizeOptions& opts) {
    const int n = s.dim();
    Rng rng(opts.seed);
    std::vector<Configuration> starts;
    auto straight = [&]() {
        Configuration c;
        c.boundary = Configuration::Boundary::FixedEnds;
        c.points.resize(k + 1);
        for (int i = 0; i <= k; ++i)
            c.points[i] = q_start + (static_cast<double>(i) / k) * (q_end - q_start);
        return c;
    };
    if (init) {
        starts.push_back(*init);
    }
    starts.push_back(straight());
    while (static_cast<int>(starts.size()) < std::max(1, opts.starts)) {
        Configuration c = straight();
        for (int i = 1; i < k; ++i) c.points[i] += opts.perturb_scale * rng.normal_vec(n);
        starts.push_back(std::move(c));
    }
    return best_of_starts(s, starts, opts);
}

PeriodicResult minimize_periodic(const GeneratingFunction& s, const Vec& rho, int period,
                                 const std::optional<Configuration>& init, const MinimizeOptions& opts) {
    const int n = s.dim();
    Rng rng(opts.seed ^ 0x7e51ULL);
    std::vector<Configuration> starts;
    auto rotational = [&](const Vec& offset) {
        Configuration c;
        c.boundary = Configuration::Boundary::Periodic;
        c.rotation = rho;
        c.points.resize(period);
        for (int i = 0; i < period; ++i)
            c.points[i] = offset + (static_cast<double>(i) / period) * rho;
        return c;
    };
    if (init) starts.push_back(*init);
    starts.push_back(rotational(Vec::Zero(n)));
    starts.push_back(rotational(Vec::Constant(n, 0.5)));
    while (static_cast<int>(starts.size()) < std::max(2, opts.starts)) {
        Configuration c = rotational(rng.uniform_vec(n));
        for (auto& p : c.points) p += opts.perturb_scale * rng.normal_vec(n);
        starts.push_back(std::move(c));
    }
    MinimizeResult mr = best_of_starts(s, starts, opts);
    PeriodicResult pr;
    pr.config = mr.config;
    pr.mean_action = mr.value / period;
    pr.converged = mr.converged;
    pr.saddle = mr.saddle;
    pr.grad_norm = mr.grad_norm;
    return pr;
}

AnnulusPoint OrbitSegment::at(long i) const {
    const long n_pts = static_cast<long>(points.size());
    if (!periodic) {
        if (i < 0 || i >= n_pts) throw std::out_of_range("orbit index out of range");
        return points[static_cast<std::size_t>(i)];
    }
    long cycles = (i >= 0) ? i / n_pts : -((-i + n_pts - 1) / n_pts);
    long j = i - cycles * n_pts;
    AnnulusPoint p = points[static_cast<std::size_t>(j)];
    if (cycles != 0) p.q += static_cast<double>(cycles) * rotation;
    return p;
}

OrbitSegment config_to_orbit(const GeneratingFunction& s, const Configuration& config) {
    Vec g = action_gradient(s, config);
    if (g.size() > 0 && g.norm() > 1e-8)
        throw NotCritical("configuration is not critical (|grad| = " + std::to_string(g.norm()) + ")");
    OrbitSegment orbit;
    orbit.periodic = config.boundary == Configuration::Boundary::Periodic;
    if (orbit.periodic) orbit.rotation = config.rotation;
    const int m = config.segment_count();
    auto [q0, q1] = config.transition(0);
    orbit.points.push_back({q0, -s.grad_q(q0, q1)});
    const int last = orbit.periodic ? m - 1 : m;
    for (int i = 1; i <= last; ++i) {
        auto [a, b] = config.transition(i - 1);
        orbit.points.push_back({b, s.grad_Q(a, b)});
    }
    // Forward verification.
    const int steps = orbit.periodic ? m : m;
    for (int i = 0; i < steps; ++i) {
        AnnulusPoint next = maps::forward(s, orbit.at(i));
        AnnulusPoint expect = orbit.at(i + 1);
        double err = (next.q - expect.q).norm() + (next.p - expect.p).norm();
        if (err > 1e-9)
            throw OrbitMismatch("forward verification failed at step " + std::to_string(i));
    }
    return orbit;
}

StrongMinCheck check_strong_min(const GeneratingFunction& s, const Configuration& config, double lbar,
                                int competitors, Rng& rng) {
    const int n = s.dim();
    // Unroll a periodic configuration to a fixed-ends window of two periods.
    Configuration base = config;
    if (config.boundary == Configuration::Boundary::Periodic) {
        base.boundary = Configuration::Boundary::FixedEnds;
        base.points.clear();
        const int per = static_cast<int>(config.points.size());
        for (int i = 0; i <= 2 * per; ++i) {
            Vec p = config.points[i % per];
            p += std::floor(static_cast<double>(i) / per) * config.rotation;
            base.points.push_back(p);
        }
    }
    const int k = base.segment_count();
    StrongMinCheck out;
    out.worst_margin = std::numeric_limits<double>::infinity();
    double base_value = action(s, base, lbar);
    MinimizeOptions opts;
    opts.starts = 4;
    for (int c = 0; c < competitors; ++c) {
        Vec k1(n), k2(n);
        for (int i = 0; i < n; ++i) {
            k1[i] = static_cast<double>(rng.uniform_int(-2, 2));
            k2[i] = static_cast<double>(rng.uniform_int(-2, 2));
        }
        int len = static_cast<int>(rng.uniform_int(1, 2 * k));
        opts.seed = rng.next_u64();
        try {
            MinimizeResult mr = minimize_fixed_ends(s, base.points.front() + k1, base.points.back() + k2,
                                                    len, std::nullopt, opts);
            double value = mr.value - len * lbar;
            double margin = value - base_value;
            ++out.checked;
            if (margin < out.worst_margin) out.worst_margin = margin;
            if (margin < -1e-8 && out.ok) {
                out.ok = false;
                out.counterexample = mr.config;
            }
        } catch (const NotConverged&) {
            continue;  // competitor unusable, skip
        }
    }
    return out;
}

ManeResult mane_potential(const GeneratingFunction& s, const Vec& x, const Vec& y, int m, double lbar,
                          const MinimizeOptions& opts) {
    ManeResult res;
    if (m == 1) {
        res.minimizer.boundary = Configuration::Boundary::FixedEnds;
        res.minimizer.points = {x, y};
        res.value = s.eval(x, y) - lbar;
        res.super_x = s.grad_q(x, y);
        res.super_y = s.grad_Q(x, y);
        return res;
    }
    MinimizeResult mr = minimize_fixed_ends(s, x, y, m, std::nullopt, opts);
    res.minimizer = mr.config;
    res.value = mr.value - m * lbar;
    res.super_x = s.grad_q(x, mr.config.points[1]);
    res.super_y = s.grad_Q(mr.config.points[m - 1], y);
    return res;
}

HessianReport hessian_fixed_ends(const GeneratingFunction& s, const Configuration& config) {
    HessianReport rep;
    rep.hessian = action_hessian(s, config);
    rep.min_eigenvalue = rep.hessian.rows() > 0 ? linalg::min_eigenvalue(rep.hessian) : 0.0;

    const int n = s.dim();
    const int m = config.segment_count();
    Mat frame = Mat::Zero(2 * n, n);
    frame.bottomRows(n) = Mat::Identity(n, n);
    for (int i = 0; i < m; ++i) {
        auto [a, b] = config.transition(i);
        frame = maps::tangent(s, a, b) * frame;
        // Renormalize to keep the span well conditioned.
        frame = linalg::orthonormal_basis(frame);
    }
    Eigen::JacobiSVD<Mat> svd(frame.topRows(n));
    rep.transversality_sigma = svd.singularValues().minCoeff();
    rep.vertical_transverse = rep.transversality_sigma > 1e-8;
    return rep;
}

}  // namespace twistlab::variational
