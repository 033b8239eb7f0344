#include "twistlab/weak_kam.hpp"

#include <algorithm>
#include <cmath>

#include "twistlab/linalg.hpp"
#include "twistlab/parallel.hpp"
#include "twistlab/variational.hpp"

namespace twistlab::weakkam {

SubactionGrid SubactionGrid::zeros(int n, int resolution, Kind kind) {
    SubactionGrid g;
    g.n = n;
    g.resolution = resolution;
    g.kind = kind;
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(resolution);
    g.values.assign(total, 0.0);
    return g;
}

Vec SubactionGrid::node(std::size_t idx) const {
    Vec x(n);
    std::size_t rem = idx;
    for (int d = n - 1; d >= 0; --d) {
        x[d] = static_cast<double>(rem % resolution) / resolution;
        rem /= resolution;
    }
    return x;
}

std::size_t SubactionGrid::index(const std::vector<int>& coords) const {
    std::size_t idx = 0;
    for (int d = 0; d < n; ++d) {
        int c = coords[d] % resolution;
        if (c < 0) c += resolution;
        idx = idx * resolution + static_cast<std::size_t>(c);
    }
    return idx;
}

double SubactionGrid::value_at(const Vec& x) const {
    // Periodic multilinear interpolation.
    std::vector<int> base(n);
    std::vector<double> frac(n);
    for (int d = 0; d < n; ++d) {
        double t = (x[d] - std::floor(x[d])) * resolution;
        base[d] = static_cast<int>(std::floor(t)) % resolution;
        frac[d] = t - std::floor(t);
    }
    double acc = 0.0;
    const int corners = 1 << n;
    std::vector<int> coords(n);
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        for (int d = 0; d < n; ++d) {
            bool hi = (c >> d) & 1;
            coords[d] = base[d] + (hi ? 1 : 0);
            w *= hi ? frac[d] : (1.0 - frac[d]);
        }
        if (w > 0.0) acc += w * values[index(coords)];
    }
    return acc;
}

Vec SubactionGrid::gradient_at_node(std::size_t idx) const {
    Vec g(n);
    std::size_t rem = idx;
    std::vector<int> coords(n);
    for (int d = n - 1; d >= 0; --d) {
        coords[d] = static_cast<int>(rem % resolution);
        rem /= resolution;
    }
    for (int d = 0; d < n; ++d) {
        auto up = coords, dn = coords;
        up[d] += 1;
        dn[d] -= 1;
        g[d] = (values[index(up)] - values[index(dn)]) * resolution / 2.0;
    }
    return g;
}

void SubactionGrid::normalize_min_zero() {
    double mn = *std::min_element(values.begin(), values.end());
    for (double& v : values) v -= mn;
}

namespace {

struct TranslateSet {
    std::vector<Vec> shifts;
};

TranslateSet make_translates(int n, int radius) {
    TranslateSet t;
    std::vector<int> k(n, -radius);
    while (true) {
        Vec shift(n);
        for (int d = 0; d < n; ++d) shift[d] = k[d];
        t.shifts.push_back(shift);
        int d = n - 1;
        while (d >= 0) {
            if (++k[d] <= radius) break;
            k[d] = -radius;
            --d;
        }
        if (d < 0) break;
    }
    return t;
}

/// One continuous descent (or ascent) step of the source point around the grid
/// argmin; u is interpolated multilinearly.
double refine_candidate(const GeneratingFunction& s, const SubactionGrid& u, double lbar,
                        const Vec& target, const Vec& best_source, double best_val, bool backward) {
    const double h = u.spacing();
    Vec grad = backward ? Vec(s.grad_q(best_source, target)) : Vec(-s.grad_Q(target, best_source));
    // Finite-difference gradient of u at the source.
    Vec gu(u.n);
    for (int d = 0; d < u.n; ++d) {
        Vec up = best_source, dn = best_source;
        up[d] += h;
        dn[d] -= h;
        gu[d] = (u.value_at(up) - u.value_at(dn)) / (2.0 * h);
    }
    Vec dir = -(grad + gu);
    double dn = dir.norm();
    if (dn < 1e-15) return best_val;
    dir /= dn;
    double best = best_val;
    for (double t : {0.5 * h, 0.25 * h, 0.1 * h}) {
        Vec src = best_source + t * dir;
        double val = backward ? u.value_at(src) + s.eval(src, target) - lbar
                              : u.value_at(src) - (s.eval(target, src) - lbar);
        if (backward ? (val < best) : (val > best)) best = val;
    }
    return best;
}

}  // namespace

SubactionGrid lax_sweep(const GeneratingFunction& s, const SubactionGrid& u, double lbar, Kind kind,
                        const SweepOptions& opts) {
    const bool backward = kind == Kind::Backward;
    SubactionGrid out = u;
    const std::size_t total = u.size();
    TranslateSet translates = make_translates(u.n, opts.translate_radius);

    // Source nodes plus their unit translates in the cover.
    std::vector<Vec> sources;
    std::vector<double> source_u;
    sources.reserve(total * translates.shifts.size());
    for (std::size_t i = 0; i < total; ++i) {
        Vec x = u.node(i);
        for (const Vec& k : translates.shifts) {
            sources.push_back(x + k);
            source_u.push_back(u.values[i]);
        }
    }

    util::parallel_for(
        total,
        [&](std::size_t j) {
            Vec y = u.node(j);
            double best = backward ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
            Vec best_src;
            for (std::size_t si = 0; si < sources.size(); ++si) {
                const Vec& x = sources[si];
                double dist = (x - y).cwiseAbs().maxCoeff();
                if (dist > opts.prune_radius) continue;
                double val = backward ? source_u[si] + s.eval(x, y) - lbar
                                      : source_u[si] - (s.eval(y, x) - lbar);
                if (backward ? (val < best) : (val > best)) {
                    best = val;
                    best_src = x;
                }
            }
            if (opts.refine && best_src.size() > 0)
                best = refine_candidate(s, u, lbar, y, best_src, best, backward);
            out.values[j] = best;
        },
        opts.threads);
    return out;
}

SubactionGrid lax_oleinik_backward(const GeneratingFunction& s, const SubactionGrid& u, double lbar,
                                   const SweepOptions& opts) {
    SubactionGrid out = lax_sweep(s, u, lbar, Kind::Backward, opts);
    out.normalize_min_zero();
    return out;
}

double estimate_lbar(const GeneratingFunction& s, int max_period, std::uint64_t seed) {
    const int n = s.dim();
    double best = std::numeric_limits<double>::infinity();
    TranslateSet rhos = make_translates(n, 1);
    variational::MinimizeOptions opts;
    opts.seed = seed;
    for (int period = 1; period <= max_period; ++period) {
        for (const Vec& rho : rhos.shifts) {
            try {
                auto pr = variational::minimize_periodic(s, rho, period, std::nullopt, opts);
                if (pr.converged && pr.mean_action < best) best = pr.mean_action;
            } catch (const NotConverged&) {
                continue;
            }
        }
    }
    if (!std::isfinite(best)) throw NotConverged("estimate_lbar: no periodic minimizer converged");
    return best;
}

SolveReport solve_calibrated(const GeneratingFunction& s, Kind kind, double lbar, double tol,
                             int max_iters, int resolution, const SweepOptions& opts) {
    const int n = s.dim();
    if (resolution <= 0) resolution = (n == 1) ? 256 : 64;
    SolveReport rep;
    SubactionGrid u = SubactionGrid::zeros(n, resolution, kind);
    for (int it = 0; it < max_iters; ++it) {
        SubactionGrid next = lax_sweep(s, u, lbar, kind, opts);
        next.normalize_min_zero();
        double inc = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            inc = std::max(inc, std::abs(next.values[i] - u.values[i]));
        u = std::move(next);
        rep.increments.push_back(inc);
        rep.iters = it + 1;
        if (inc <= tol) {
            rep.converged = true;
            break;
        }
    }
    u.residual = rep.increments.empty() ? 0.0 : rep.increments.back();

    if (kind == Kind::Backward) {
        // Upper second differences per unit h^2, periodic neighbors.
        const double h = u.spacing();
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < u.size(); ++i) {
            Vec x = u.node(i);
            for (int d = 0; d < n; ++d) {
                Vec up = x, dn = x;
                up[d] += h;
                dn[d] -= h;
                double second = (u.value_at(up) + u.value_at(dn) - 2.0 * u.values[i]) / (h * h);
                worst = std::max(worst, second);
            }
        }
        rep.semiconcavity_max = worst;
    }
    rep.u = std::move(u);
    return rep;
}

double contact_defect(const GeneratingFunction& s, const SubactionGrid& u, double lbar, const Vec& x,
                      const Vec& y) {
    return u.value_at(y) - u.value_at(x) - (s.eval(x, y) - lbar);
}

WeakKamReport conjugate_pair(const GeneratingFunction& s, const SubactionGrid& u_minus, double lbar,
                             double tol, int max_iters, double tol_I, const SweepOptions& opts) {
    WeakKamReport rep;
    rep.lbar = lbar;
    rep.u_minus = u_minus;

    SubactionGrid u = u_minus;
    u.kind = Kind::Forward;
    double inc = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iters && inc > tol; ++it) {
        SubactionGrid next = lax_sweep(s, u, lbar, Kind::Forward, opts);
        inc = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            inc = std::max(inc, std::abs(next.values[i] - u.values[i]));
        u = std::move(next);
    }
    rep.conjugacy_residual = inc;
    u.residual = inc;

    // Pin the additive constant: max(u- - u+) = 0.
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.size(); ++i)
        shift = std::max(shift, u_minus.values[i] - u.values[i]);
    for (double& v : u.values) v += shift;
    rep.u_plus = std::move(u);

    rep.tol_I = tol_I > 0 ? tol_I : 4.0 * std::max({u_minus.residual, rep.u_plus.residual, 1e-12});
    for (std::size_t i = 0; i < u_minus.size(); ++i)
        if (rep.u_plus.values[i] - u_minus.values[i] <= rep.tol_I) rep.coincidence.push_back(i);

    // Calibration partners of u-.
    SweepOptions sweep_opts = opts;
    TranslateSet translates = make_translates(u_minus.n, sweep_opts.translate_radius);
    for (std::size_t j = 0; j < u_minus.size(); ++j) {
        Vec y = u_minus.node(j);
        double best = std::numeric_limits<double>::infinity();
        Vec best_x;
        for (std::size_t i = 0; i < u_minus.size(); ++i) {
            Vec x = u_minus.node(i);
            for (const Vec& k : translates.shifts) {
                Vec xs = x + k;
                if ((xs - y).cwiseAbs().maxCoeff() > sweep_opts.prune_radius) continue;
                double val = u_minus.values[i] + s.eval(xs, y) - lbar;
                if (val < best) {
                    best = val;
                    best_x = xs;
                }
            }
        }
        double defect = u_minus.values[j] - best;
        if (std::abs(defect) <= rep.tol_I) rep.contact_pairs.push_back({best_x, y, defect});
    }
    return rep;
}

SigmaSet sigma_set(const GeneratingFunction& s, const SubactionGrid& u_minus, const Vec& y, double lbar,
                   double tol_sigma) {
    SigmaSet out;
    TranslateSet translates = make_translates(u_minus.n, 1);
    std::vector<std::pair<double, Vec>> candidates;
    for (std::size_t i = 0; i < u_minus.size(); ++i) {
        Vec x = u_minus.node(i);
        for (const Vec& k : translates.shifts) {
            Vec xs = x + k;
            if ((xs - y).cwiseAbs().maxCoeff() > 2.0) continue;
            candidates.emplace_back(u_minus.values[i] + s.eval(xs, y) - lbar, xs);
        }
    }
    double global = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) global = std::min(global, c.first);
    out.global_min = global;

    // Cluster the near-optimal sources.
    const double h = u_minus.spacing();
    std::vector<Vec> reps;
    std::vector<double> rep_vals;
    std::vector<std::pair<double, Vec>> near;
    for (const auto& c : candidates)
        if (c.first <= global + tol_sigma) near.push_back(c);
    std::sort(near.begin(), near.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& c : near) {
        bool merged = false;
        for (std::size_t r = 0; r < reps.size(); ++r) {
            if ((c.second - reps[r]).cwiseAbs().maxCoeff() <= 1.5 * h) {
                merged = true;
                break;
            }
        }
        if (!merged) {
            reps.push_back(c.second);
            rep_vals.push_back(c.first);
        }
    }
    // Parabolic refinement along each axis from the three-point stencil.
    for (auto& r : reps) {
        for (int d = 0; d < u_minus.n; ++d) {
            auto f = [&](double off) {
                Vec x = r;
                x[d] += off;
                return u_minus.value_at(x) + s.eval(x, y) - lbar;
            };
            double fm = f(-h), f0 = f(0.0), fp = f(h);
            double denom = fm - 2.0 * f0 + fp;
            if (denom > 1e-14) {
                double off = 0.5 * h * (fm - fp) / denom;
                if (std::abs(off) <= h) r[d] += off;
            }
        }
    }
    out.minimizers = reps;
    out.singleton = reps.size() == 1;
    if (out.singleton) out.superdifferential = s.grad_Q(reps[0], y);
    return out;
}

}  // namespace twistlab::weakkam
