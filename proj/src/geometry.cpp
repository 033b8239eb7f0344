#include "twistlab/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "twistlab/linalg.hpp"
#include "twistlab/rng.hpp"
#include "twistlab/variational.hpp"

namespace twistlab::geometry {

namespace {

struct Cluster {
    Vec mean;  // unnormalized accumulator
    int weight = 0;
    Vec rep() const { return mean.normalized(); }
};

std::vector<Cluster> cluster_directions(const std::vector<Vec>& dirs, const std::vector<int>& weights,
                                        double angle_deg) {
    const double cos_thresh = std::cos(angle_deg * M_PI / 180.0);
    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        const Vec& d = dirs[i];
        int w = weights.empty() ? 1 : weights[i];
        bool placed = false;
        for (auto& c : clusters) {
            if (c.rep().dot(d) >= cos_thresh) {
                c.mean += w * d;
                c.weight += w;
                placed = true;
                break;
            }
        }
        if (!placed) clusters.push_back({d, w});
    }
    return clusters;
}

ConeSample finalize(const Vec& a, const std::vector<Cluster>& clusters, const std::vector<double>& radii,
                    const ConeOptions& opts) {
    ConeSample cone;
    cone.base = a;
    cone.radii = radii;
    for (const auto& c : clusters) {
        if (c.weight < opts.min_weight) continue;
        cone.directions.push_back(c.rep());
        cone.weights.push_back(c.weight);
    }
    return cone;
}

}  // namespace

std::vector<double> dyadic_radii(double r0, int levels) {
    std::vector<double> radii;
    double r = r0;
    for (int j = 0; j < levels; ++j, r *= 0.5) radii.push_back(r);
    return radii;
}

ConeSample contingent_cone(const std::vector<Vec>& samples, const Vec& a,
                           const std::vector<double>& radii, const ConeOptions& opts) {
    if (samples.size() < 2) throw InsufficientSamples("need at least two samples");
    std::vector<Vec> dirs;
    for (double r : radii) {
        for (const Vec& s : samples) {
            double d = (s - a).norm();
            if (d >= 0.5 * r && d <= r) dirs.push_back((s - a) / d);
        }
    }
    return finalize(a, cluster_directions(dirs, {}, opts.cluster_angle_deg), radii, opts);
}

ConeSample limit_contingent_cone(const std::vector<Vec>& samples, const Vec& a, int neighbor_count,
                                 const std::vector<double>& radii, const ConeOptions& opts) {
    if (samples.size() < 2) throw InsufficientSamples("need at least two samples");
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < samples.size(); ++i) order.emplace_back((samples[i] - a).norm(), i);
    std::sort(order.begin(), order.end());

    std::vector<Vec> dirs;
    std::vector<int> weights;
    const int count = std::min<int>(neighbor_count, static_cast<int>(order.size()));
    for (int k = 0; k < count; ++k) {
        const Vec& b = samples[order[static_cast<std::size_t>(k)].second];
        ConeSample local = contingent_cone(samples, b, radii, opts);
        for (std::size_t j = 0; j < local.directions.size(); ++j) {
            dirs.push_back(local.directions[j]);
            weights.push_back(local.weights[j]);
        }
    }
    return finalize(a, cluster_directions(dirs, weights, opts.cluster_angle_deg), radii, opts);
}

std::pair<Mat, Mat> modified_green(const GreenData& g) {
    const double c0 = symplectic::kBandC0;
    return {g.s_minus - c0 * g.delta_s, g.s_plus + c0 * g.delta_s};
}

namespace {

/// Feasibility margin of the betweenness criterion; negative means no graph
/// in the band contains v.
double between_margin(const Vec& v, const Mat& w_minus, const Mat& w_plus) {
    const int n = static_cast<int>(w_minus.rows());
    Vec a = v.head(n);
    Vec b = v.tail(n);
    if (a.norm() <= 1e-14 * std::max(1.0, v.norm()))
        return b.norm() <= 1e-14 * std::max(1.0, v.norm()) ? 0.0 : -1.0;
    Mat d = linalg::symmetrize(w_plus - w_minus);
    Vec u = b - w_minus * a;
    if (u.norm() <= 1e-12 * std::max(1.0, v.norm())) return 0.0;
    Mat dp = linalg::pinv_sym(d, 1e-10);
    Vec proj = d * (dp * u);
    if ((u - proj).norm() > 1e-9 * u.norm()) return -(u - proj).norm() / u.norm();
    return u.dot(a) - u.dot(dp * u);
}

}  // namespace

ConeTheoremReport verify_cone_theorem(const GeneratingFunction& s, const std::vector<Vec>& aubry_samples,
                                      const std::vector<Vec>& base_points,
                                      const std::function<GreenData(const Vec&)>& green_map, double tol,
                                      const ConeOptions& opts) {
    const int n = s.dim();
    ConeTheoremReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (const Vec& b : base_points) {
        double r0 = 0.0;
        for (const Vec& smp : aubry_samples) r0 = std::max(r0, (smp - b).norm());
        if (r0 <= 0.0) continue;
        ConeSample cone =
            limit_contingent_cone(aubry_samples, b, 5, dyadic_radii(r0, opts.max_levels), opts);
        GreenData g = green_map(b);
        auto [wm, wp] = modified_green(g);
        Mat wm_wide = wm - tol * Mat::Identity(n, n);
        Mat wp_wide = wp + tol * Mat::Identity(n, n);
        for (const Vec& v : cone.directions) {
            ++rep.directions_checked;
            bool ok = symplectic::between_check_graphs(v, wm_wide, wp_wide);
            if (ok) ++rep.directions_passed;
            rep.worst_margin = std::min(rep.worst_margin, between_margin(v, wm_wide, wp_wide));
        }
    }
    if (rep.directions_checked > 0)
        rep.pass_rate = static_cast<double>(rep.directions_passed) / rep.directions_checked;
    else
        rep.worst_margin = 0.0;
    rep.passed = rep.directions_passed == rep.directions_checked;
    return rep;
}

bool c1_isotropic_check(const ConeSample& cone, const symplectic::SymplecticSpace& space, double tol) {
    if (cone.directions.empty()) return true;
    double worst = 0.0;
    for (std::size_t i = 0; i < cone.directions.size(); ++i)
        for (std::size_t j = i + 1; j < cone.directions.size(); ++j)
            worst = std::max(worst, std::abs(space.omega(cone.directions[i], cone.directions[j])));
    if (worst > tol) return false;
    Mat span(cone.directions[0].size(), static_cast<Eigen::Index>(cone.directions.size()));
    for (std::size_t i = 0; i < cone.directions.size(); ++i)
        span.col(static_cast<Eigen::Index>(i)) = cone.directions[i];
    int rank = static_cast<int>(linalg::orthonormal_basis(span, 1e-6).cols());
    return rank <= space.n;
}

PalgReport palg_inequality_check(const GeneratingFunction& s, const weakkam::WeakKamReport& report,
                                 const Vec& x, const std::vector<Vec>& nearby_points, int m,
                                 double fd_step, int k_samples, std::uint64_t seed) {
    const int n = s.dim();
    const auto& u = report.u_minus;
    const int res = u.resolution;

    auto node_index = [&](const Vec& p) {
        std::vector<int> coords(n);
        for (int d = 0; d < n; ++d)
            coords[d] = static_cast<int>(std::llround((p[d] - std::floor(p[d])) * res)) % res;
        return u.index(coords);
    };
    auto du = [&](const Vec& p) { return u.gradient_at_node(node_index(p)); };

    // Orbit of (x, du-(x)).
    AnnulusPoint phase{x, du(x)};
    AnnulusPoint back = phase, fwd = phase;
    for (int i = 0; i < m; ++i) {
        back = maps::backward(s, back);
        fwd = maps::forward(s, fwd);
    }
    const Vec x_minus_m = back.q;
    const Vec x_plus_m = fwd.q;

    variational::MinimizeOptions mopts;
    mopts.starts = 4;
    mopts.seed = seed;
    auto mane_y = [&](const Vec& y) {
        return variational::mane_potential(s, x_minus_m, y, m, report.lbar, mopts).value;
    };
    auto mane_x = [&](const Vec& xx) {
        return variational::mane_potential(s, xx, x_plus_m, m, report.lbar, mopts).value;
    };
    auto fd_hessian = [&](const std::function<double(const Vec&)>& f, const Vec& at) {
        Mat h(n, n);
        const double hh = fd_step;
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                Vec pp = at, pm = at, mp = at, mm = at;
                pp[i] += hh; pp[j] += hh;
                pm[i] += hh; pm[j] -= hh;
                mp[i] -= hh; mp[j] += hh;
                mm[i] -= hh; mm[j] -= hh;
                h(i, j) = h(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * hh * hh);
            }
        }
        return h;
    };

    PalgReport rep;
    rep.a_yy = fd_hessian(mane_y, x);
    rep.a_xx = fd_hessian(mane_x, x);
    Mat q_plus = rep.a_yy;
    Mat q_minus = -rep.a_xx;

    Rng rng(seed);
    rep.worst_margin = std::numeric_limits<double>::infinity();
    Vec dux = du(x);
    for (const Vec& yn : nearby_points) {
        double lambda = (yn - x).norm();
        if (lambda <= 0.0) continue;
        PalgReport::Pair pair;
        pair.x_dir = (yn - x) / lambda;
        pair.y_dir = (du(yn) - dux) / lambda;

        double margin;
        try {
            auto hyp = symplectic::pbilin_hypotheses(q_minus, q_plus, pair.x_dir, pair.y_dir);
            margin = std::min(hyp.slack_upper, hyp.slack_lower);
            if (hyp.range_residual > 1e-9) margin = std::min(margin, -hyp.range_residual);
        } catch (const NotOrdered&) {
            margin = -std::numeric_limits<double>::infinity();
        }
        // Direct evaluation on sampled k directions.
        for (int ks = 0; ks < k_samples; ++ks) {
            Vec k = rng.normal_vec(n);
            if (k.norm() < 1e-12) continue;
            k *= rng.uniform(0.25, 2.0) / k.norm();
            const Vec& X = pair.x_dir;
            const Vec& Y = pair.y_dir;
            double s1 = 0.5 * (k.dot(q_plus * k) + X.dot(q_plus * X) -
                               (X - k).dot(q_minus * (X - k))) - Y.dot(k);
            double s2 = Y.dot(k) - 0.5 * (k.dot(q_minus * k) + X.dot(q_minus * X) -
                                          (k - X).dot(q_plus * (k - X)));
            margin = std::min({margin, s1, s2});
        }
        pair.margin = margin;
        pair.admits_sigma = false;
        if (margin > 1e-9) {
            try {
                Mat sigma = symplectic::pbilin_construct(q_minus, q_plus, pair.x_dir, pair.y_dir);
                const double c0 = symplectic::kBandC0;
                Mat dq = q_plus - q_minus;
                bool band_lo = linalg::is_psd(sigma - (q_minus - c0 * dq), 1e-9);
                bool band_hi = linalg::is_psd((q_plus + c0 * dq) - sigma, 1e-9);
                double sx_err = (sigma * pair.x_dir - pair.y_dir).norm();
                pair.admits_sigma = band_lo && band_hi && sx_err <= 1e-10 * std::max(1.0, pair.y_dir.norm());
            } catch (const std::exception&) {
                pair.admits_sigma = false;
            }
            if (!pair.admits_sigma) rep.all_admit_sigma = false;
        }
        rep.worst_margin = std::min(rep.worst_margin, margin);
        rep.pairs.push_back(std::move(pair));
    }
    if (rep.pairs.empty()) rep.worst_margin = 0.0;
    return rep;
}

}  // namespace twistlab::geometry
