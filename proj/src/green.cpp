#include "twistlab/green.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>

#include "twistlab/linalg.hpp"

namespace twistlab::green {

namespace {

struct Blocks {
    Mat a, b, c, d;
};

Blocks split(const Mat& m) {
    const int n = static_cast<int>(m.rows()) / 2;
    return {m.topLeftCorner(n, n), m.topRightCorner(n, n), m.bottomLeftCorner(n, n),
            m.bottomRightCorner(n, n)};
}

/// Graph matrix of M * graph(W): W' = (C + D W)(A + B W)^-1.
Mat moebius(const Mat& m, const Mat& w) {
    Blocks blk = split(m);
    Mat denom = blk.a + blk.b * w;
    Eigen::PartialPivLU<Mat> lu(denom);
    Eigen::JacobiSVD<Mat> svd(denom);
    if (svd.singularValues().minCoeff() <=
        1e-12 * std::max(1.0, svd.singularValues().maxCoeff()))
        throw ConjugatePoint("iterated vertical meets the vertical");
    return linalg::symmetrize((blk.c + blk.d * w) * lu.inverse());
}

/// Graph matrix of M * V (first push of the vertical): [B; D] -> D B^-1.
Mat vertical_image(const Mat& m) {
    Blocks blk = split(m);
    Eigen::JacobiSVD<Mat> svd(blk.b);
    if (svd.singularValues().minCoeff() <=
        1e-12 * std::max(1.0, svd.singularValues().maxCoeff()))
        throw ConjugatePoint("image of the vertical meets the vertical");
    return linalg::symmetrize(blk.d * blk.b.inverse());
}

Mat tangent_at(const GeneratingFunction& s, const OrbitSegment& orbit, long i) {
    return maps::tangent(s, orbit.at(i).q, orbit.at(i + 1).q);
}

void require_window(const OrbitSegment& orbit, long center, int k_max) {
    if (orbit.periodic) return;
    if (center - k_max < 0 || center + k_max >= orbit.size())
        throw std::invalid_argument("orbit segment too short for the requested horizon");
}

/// s_k at `center`: vertical pushed forward from center - k.
Mat push_forward(const GeneratingFunction& s, const OrbitSegment& orbit, long center, int k) {
    Mat w = vertical_image(tangent_at(s, orbit, center - k));
    for (int j = 1; j < k; ++j) w = moebius(tangent_at(s, orbit, center - k + j), w);
    return w;
}

/// s_-k at `center`: vertical pushed backward from center + k.
Mat push_backward(const GeneratingFunction& s, const OrbitSegment& orbit, long center, int k) {
    Mat minv = maps::symplectic_inverse(tangent_at(s, orbit, center + k - 1));
    Mat w = vertical_image(minv);
    for (int j = 1; j < k; ++j)
        w = moebius(maps::symplectic_inverse(tangent_at(s, orbit, center + k - 1 - j)), w);
    return w;
}

double spectral_norm_sym(const Mat& m) { return m.rows() ? linalg::max_abs_eigenvalue(m) : 0.0; }

}  // namespace

GreenIterates green_iterates(const GeneratingFunction& s, const OrbitSegment& orbit, int k_max,
                             long center) {
    require_window(orbit, center, k_max);
    GreenIterates out;
    for (int k = 1; k <= k_max; ++k) {
        out.forward.push_back(push_forward(s, orbit, center, k));
        out.backward.push_back(push_backward(s, orbit, center, k));
    }
    for (int k = 0; k + 1 < k_max; ++k) {
        Mat fwd_gap = out.forward[k] - out.forward[k + 1];
        Mat bwd_gap = out.backward[k + 1] - out.backward[k];
        double scale = std::max(1.0, spectral_norm_sym(out.forward[k]));
        if (linalg::min_eigenvalue(fwd_gap) < -1e-10 * scale ||
            linalg::min_eigenvalue(bwd_gap) < -1e-10 * scale)
            throw MonotonicityViolation("iterated verticals lost strict monotonicity at k = " +
                                        std::to_string(k + 1));
    }
    return out;
}

GreenData green_bundles(const GeneratingFunction& s, const OrbitSegment& orbit, double tol, int k_max,
                        bool richardson, long center) {
    GreenData data;
    data.base = orbit.at(center);
    Mat prev_f, prev_b, cur_f, cur_b;
    int k_done = 0;
    double inc = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= k_max; ++k) {
        if (!orbit.periodic && (center - k < 0 || center + k >= orbit.size())) break;
        Mat f = push_forward(s, orbit, center, k);
        Mat b = push_backward(s, orbit, center, k);
        prev_f = cur_f;
        prev_b = cur_b;
        cur_f = f;
        cur_b = b;
        k_done = k;
        if (k > 1) {
            inc = std::max(spectral_norm_sym(cur_f - prev_f), spectral_norm_sym(cur_b - prev_b));
            if (inc <= tol) {
                data.converged = true;
                break;
            }
        }
    }
    data.k_used = k_done;
    if (data.converged) {
        data.s_plus = cur_f;
        data.s_minus = cur_b;
    } else if (richardson && k_done >= 2) {
        // Two-term fit s_j ~ s_inf + c/j through j = k-1 and j = k.
        double km1 = k_done - 1;
        data.s_plus = cur_f - km1 * (prev_f - cur_f);
        data.s_minus = cur_b - km1 * (prev_b - cur_b);
        data.extrapolated = true;
    } else {
        throw NotConverged("green iterates still moving by " + std::to_string(inc) + " at k_max");
    }
    data.delta_s = linalg::symmetrize(data.s_plus - data.s_minus);
    double norm = spectral_norm_sym(data.delta_s);
    data.rank_cutoff = std::max(10.0 * tol, 1e-8) * (1.0 + norm);
    Vec ev = linalg::sym_eigenvalues(data.delta_s);
    data.p_dim = 0;
    double smallest_above = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] <= data.rank_cutoff)
            ++data.p_dim;
        else
            smallest_above = std::min(smallest_above, ev[i]);
    }
    if (std::isfinite(smallest_above)) data.q_plus_val = smallest_above;
    return data;
}

DynamicalCriterion dynamical_criterion_check(const GeneratingFunction& s, const OrbitSegment& orbit,
                                             const Vec& v, int horizon,
                                             const std::optional<GreenData>& data, long center) {
    require_window(orbit, center, horizon);
    const int n = s.dim();
    DynamicalCriterion out;
    const double vnorm = std::max(v.norm(), 1e-300);

    Vec w = v;
    for (int k = 1; k <= horizon; ++k) {
        w = tangent_at(s, orbit, center + k - 1) * w;
        out.growth_forward = std::max(out.growth_forward, w.head(n).norm() / vnorm);
    }
    w = v;
    for (int k = 1; k <= horizon; ++k) {
        w = maps::symplectic_inverse(tangent_at(s, orbit, center - k)) * w;
        out.growth_backward = std::max(out.growth_backward, w.head(n).norm() / vnorm);
    }
    const double ratio_threshold = 1e3;
    out.bounded_forward = out.growth_forward <= ratio_threshold;
    out.bounded_backward = out.growth_backward <= ratio_threshold;

    GreenData gd = data ? *data : green_bundles(s, orbit, 1e-10, 256, true, center);
    auto distance_to_graph = [&](const Mat& graph) {
        Mat frame(2 * n, n);
        frame.topRows(n) = Mat::Identity(n, n);
        frame.bottomRows(n) = graph;
        Mat u = linalg::orthonormal_basis(frame);
        Vec resid = v - u * (u.transpose() * v);
        return resid.norm() / vnorm;
    };
    if (out.bounded_forward) out.dist_to_g_minus = distance_to_graph(gd.s_minus);
    if (out.bounded_backward) out.dist_to_g_plus = distance_to_graph(gd.s_plus);
    return out;
}

namespace {

SpectrumReport finalize_spectrum(std::vector<double> exps, double tau_override, double default_tau_base) {
    SpectrumReport rep;
    std::sort(exps.begin(), exps.end(), std::greater<double>());
    rep.exponents = std::move(exps);
    double max_abs = 0.0;
    for (double e : rep.exponents) max_abs = std::max(max_abs, std::abs(e));
    rep.tau = tau_override > 0 ? tau_override : default_tau_base * (1.0 + max_abs);
    for (double e : rep.exponents) {
        if (e > rep.tau)
            ++rep.pos_count;
        else if (e < -rep.tau)
            ++rep.neg_count;
        else
            ++rep.zero_count;
    }
    const std::size_t m = rep.exponents.size();
    for (std::size_t i = 0; i < m; ++i)
        rep.pairing_defect =
            std::max(rep.pairing_defect, std::abs(rep.exponents[i] + rep.exponents[m - 1 - i]));
    return rep;
}

}  // namespace

SpectrumReport lyapunov_spectrum(const GeneratingFunction& s, const OrbitSegment& orbit, long n_steps,
                                 long burn_in, double tau_override, long start) {
    const int n = s.dim();
    if (!orbit.periodic && start + n_steps >= orbit.size())
        throw std::invalid_argument("orbit too short for the requested iteration count");
    if (burn_in < 0) burn_in = std::min<long>(n_steps / 10, 200);

    Mat q = Mat::Identity(2 * n, 2 * n);
    Vec acc = Vec::Zero(2 * n);
    for (long k = 0; k < n_steps; ++k) {
        Mat z = tangent_at(s, orbit, start + k) * q;
        Eigen::HouseholderQR<Mat> qr(z);
        Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
        q = qr.householderQ() * Mat::Identity(2 * n, 2 * n);
        if (k >= burn_in)
            for (int i = 0; i < 2 * n; ++i) acc[i] += std::log(std::abs(r(i, i)));
    }
    const double denom = static_cast<double>(n_steps - burn_in);
    std::vector<double> exps(2 * n);
    for (int i = 0; i < 2 * n; ++i) exps[i] = acc[i] / denom;
    return finalize_spectrum(std::move(exps), tau_override,
                             std::max(10.0 / static_cast<double>(n_steps), 1e-3));
}

SpectrumReport periodic_spectrum(const GeneratingFunction& s, const OrbitSegment& orbit,
                                 double tau_override) {
    if (!orbit.periodic) throw std::invalid_argument("periodic_spectrum needs a periodic orbit");
    const int n = s.dim();
    const int period = orbit.size();
    Mat m = Mat::Identity(2 * n, 2 * n);
    for (int i = 0; i < period; ++i) m = tangent_at(s, orbit, i) * m;
    Eigen::EigenSolver<Mat> es(m);
    std::vector<double> exps(2 * n);
    for (int i = 0; i < 2 * n; ++i)
        exps[i] = std::log(std::abs(es.eigenvalues()[i])) / period;
    return finalize_spectrum(std::move(exps), tau_override, 1e-6);
}

double c_constant(const GeneratingFunction& s, const OrbitSegment& orbit) {
    const long count = orbit.periodic ? orbit.size() : orbit.size() - 2;
    const long first = orbit.periodic ? 0 : 1;
    double worst = 0.0;
    for (long i = first; i < first + count; ++i) {
        Mat s1 = vertical_image(tangent_at(s, orbit, i - 1));
        Mat sm1 = vertical_image(maps::symplectic_inverse(tangent_at(s, orbit, i)));
        worst = std::max(worst, spectral_norm_sym(s1 - sm1));
    }
    return worst;
}

Thm1Report verify_thm1(const GeneratingFunction& s, const OrbitSegment& orbit, long n_steps,
                       double green_tol, double tau_override) {
    const int n = s.dim();
    Thm1Report rep;
    const int period = orbit.periodic ? orbit.size() : 1;
    std::map<int, int> histogram;
    for (int i = 0; i < period; ++i) {
        GreenData gd = green_bundles(s, orbit, green_tol, 4096, true, i);
        rep.p_dims.push_back(gd.p_dim);
        histogram[gd.p_dim]++;
    }
    rep.p = histogram.begin()->first;
    for (const auto& [val, cnt] : histogram)
        if (cnt > histogram[rep.p]) rep.p = val;

    rep.spectrum = lyapunov_spectrum(s, orbit, n_steps, -1, tau_override);
    rep.monodromy = orbit.periodic ? periodic_spectrum(s, orbit) : rep.spectrum;
    rep.passed = rep.spectrum.zero_count == 2 * rep.p && rep.spectrum.pos_count == n - rep.p &&
                 rep.spectrum.neg_count == n - rep.p;
    return rep;
}

Thm2Report verify_thm2(const GeneratingFunction& s, const OrbitSegment& orbit, double green_tol,
                       double tol) {
    Thm2Report rep;
    SpectrumReport spec = periodic_spectrum(s, orbit);
    if (spec.pos_count == 0) {
        rep.skipped = true;
        return rep;
    }
    double lambda = std::numeric_limits<double>::infinity();
    for (double e : spec.exponents)
        if (e > spec.tau) lambda = std::min(lambda, e);
    rep.lambda_mu = lambda;
    rep.c_value = c_constant(s, orbit);

    const int period = orbit.periodic ? orbit.size() : 1;
    double sum = 0.0;
    for (int i = 0; i < period; ++i) {
        GreenData gd = green_bundles(s, orbit, green_tol, 4096, true, i);
        if (gd.q_plus_val) sum += 0.5 * std::log(1.0 + *gd.q_plus_val / rep.c_value);
    }
    rep.bound = sum / period;
    rep.slack = rep.lambda_mu - rep.bound;
    rep.passed = rep.slack >= -tol;
    return rep;
}

namespace {

Mat graph_frame(const Mat& w) {
    const int n = static_cast<int>(w.rows());
    Mat f(2 * n, n);
    f.topRows(n) = Mat::Identity(n, n);
    f.bottomRows(n) = w;
    return f;
}

using symplectic::LagrangianFrame;

/// Strict order l1 < l2 in the reduced space: q(l1, v; l2) positive definite.
bool reduced_strictly_under(const Mat& l1, const Mat& l2, const Mat& v, const Mat& form) {
    auto f1 = LagrangianFrame{l1, std::nullopt};
    auto f2 = LagrangianFrame{l2, std::nullopt};
    auto fv = LagrangianFrame{v, std::nullopt};
    Mat q = symplectic::relative_form(f1, fv, f2, form);
    return linalg::is_pd(q, 1e-12);
}

}  // namespace

ReducedReport reduced_green_diagnostics(const GeneratingFunction& s, const OrbitSegment& orbit,
                                        const GreenData& data, double tol, int k_limit) {
    const int n = s.dim();
    ReducedReport rep;
    rep.p_dim = data.p_dim;
    if (data.p_dim == 0) {
        rep.trivial = true;
        rep.passed = true;
        rep.note = "transverse Green bundles, reduction is the identity";
        return rep;
    }
    rep.reduced_dim = 2 * (n - data.p_dim);
    if (rep.reduced_dim == 0) {
        rep.trivial = true;
        rep.passed = true;
        rep.note = "G- = G+, reduced space has dimension zero";
        return rep;
    }

    // The intersection dimension must be numerically unambiguous: the delta_s
    // spectrum has to split by a factor 10 around the cutoff.
    Vec ev = linalg::sym_eigenvalues(data.delta_s);
    double below = 0.0, above = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] <= data.rank_cutoff)
            below = std::max(below, std::abs(ev[i]));
        else
            above = std::min(above, ev[i]);
    }
    if (std::isfinite(above) && above < 10.0 * std::max(below, 1e-300))
        throw ReductionIllConditioned("delta_s spectrum does not split around the rank cutoff");

    const int period = orbit.periodic ? orbit.size() : 1;
    auto space = symplectic::SymplecticSpace::standard(n);

    // Per-point Green data and reductions.
    std::vector<GreenData> gds(period);
    std::vector<symplectic::ReducedSpace> reds(period);
    std::vector<Mat> vert(period);  // reduced trace of the vertical
    for (int i = 0; i < period; ++i) {
        gds[i] = green_bundles(s, orbit, tol, 4096, true, i);
        Mat gm = graph_frame(gds[i].s_minus);
        Mat gp = graph_frame(gds[i].s_plus);
        Mat both(2 * n, 2 * n);
        both << gm, gp;
        Mat e_frame = linalg::orthonormal_basis(both, 1e-7);
        Mat r_frame = linalg::subspace_intersection(gm, gp, 1e-7);
        if (static_cast<int>(r_frame.cols()) != data.p_dim ||
            static_cast<int>(e_frame.cols()) != 2 * n - data.p_dim)
            throw ReductionIllConditioned("numerical E or R has unexpected dimension");
        reds[i] = symplectic::symplectic_reduce(e_frame, r_frame, space);
        Mat vframe = Mat::Zero(2 * n, n);
        vframe.bottomRows(n) = Mat::Identity(n, n);
        Mat trace = linalg::subspace_intersection(vframe, e_frame, 1e-7);
        vert[i] = linalg::orthonormal_basis(reds[i].project_frame(trace), 1e-9);
    }

    auto reduced_cocycle = [&](int i) {
        // F(x_i) -> F(x_{i+1})
        return reds[(i + 1) % period].project_frame(tangent_at(s, orbit, i) * reds[i % period].basis);
    };
    auto push_reduced = [&](int k) {
        // g_k at point 0 for k > 0, g_{-k} for k < 0; both start at index -k.
        Mat w = vert[((-k) % period + period) % period];
        if (k > 0) {
            for (int j = 0; j < k; ++j) {
                int idx = ((j - k) % period + period) % period;
                w = reduced_cocycle(idx) * w;
                w = linalg::orthonormal_basis(w);
            }
        } else {
            for (int j = 0; j < -k; ++j) {
                int idx = ((-k - 1 - j) % period + period) % period;
                // Inverse reduced step: solve M g' = g.
                Mat m = reduced_cocycle(idx);
                w = m.partialPivLu().solve(w);
                w = linalg::orthonormal_basis(w);
            }
        }
        return w;
    };

    const Mat& omega = reds[0].reduced_form;
    const Mat& v0 = vert[0];
    Mat pg_minus = reds[0].reduce_lagrangian(graph_frame(gds[0].s_minus));
    Mat pg_plus = reds[0].reduce_lagrangian(graph_frame(gds[0].s_plus));

    // (i) transversality of g_k to the reduced vertical.
    rep.transversal_ok = true;
    std::vector<Mat> g_fwd(k_limit + 1), g_bwd(k_limit + 1);
    for (int k = 1; k <= k_limit; ++k) {
        g_fwd[k] = push_reduced(k);
        g_bwd[k] = push_reduced(-k);
        if (linalg::transversality_margin(g_fwd[k], v0) <= 1e-8 ||
            linalg::transversality_margin(g_bwd[k], v0) <= 1e-8)
            rep.transversal_ok = false;
    }

    // (ii) strict order chain g_-k < g_-m < p(G-) < p(G+) < g_m < g_k for k < m.
    rep.chain_ok = reduced_strictly_under(pg_minus, pg_plus, v0, omega);
    for (int k = 1; k <= k_limit && rep.chain_ok; ++k) {
        if (!reduced_strictly_under(g_bwd[k], pg_minus, v0, omega) ||
            !reduced_strictly_under(pg_plus, g_fwd[k], v0, omega))
            rep.chain_ok = false;
        for (int m = k + 1; m <= k_limit && rep.chain_ok; ++m) {
            if (!reduced_strictly_under(g_bwd[k], g_bwd[m], v0, omega) ||
                !reduced_strictly_under(g_fwd[m], g_fwd[k], v0, omega))
                rep.chain_ok = false;
        }
    }

    // (iii) convergence of the reduced iterates to the reduced Green bundles.
    const int k_big = std::max(40, 4 * k_limit);
    rep.limit_dist_forward = linalg::subspace_distance(push_reduced(k_big), pg_plus);
    rep.limit_dist_backward = linalg::subspace_distance(push_reduced(-k_big), pg_minus);
    rep.limits_ok = rep.limit_dist_forward <= 10.0 * tol && rep.limit_dist_backward <= 10.0 * tol;

    rep.passed = rep.transversal_ok && rep.chain_ok && rep.limits_ok;
    return rep;
}

double invariance_defect(const GeneratingFunction& s, const OrbitSegment& orbit, double tol, int k_max) {
    const int period = orbit.periodic ? orbit.size() : 1;
    double worst = 0.0;
    for (int i = 0; i < period; ++i) {
        GreenData here = green_bundles(s, orbit, tol, k_max, true, i);
        GreenData next = green_bundles(s, orbit, tol, k_max, true, i + 1);
        Mat df = tangent_at(s, orbit, i);
        for (bool plus : {false, true}) {
            Mat w = plus ? here.s_plus : here.s_minus;
            Mat target = plus ? next.s_plus : next.s_minus;
            Mat image = moebius(df, w);
            worst = std::max(worst, spectral_norm_sym(image - target));
        }
    }
    return worst;
}

}  // namespace twistlab::green
