#pragma once

#include <optional>

#include "twistlab/rng.hpp"
#include "twistlab/twist_map.hpp"
#include "twistlab/types.hpp"

namespace twistlab::variational {

using maps::GeneratingFunction;

/// A finite configuration q_0, ..., q_k in the universal cover.  Periodic
/// configurations store one period; q_{i+N} = q_i + rotation by construction.
struct Configuration {
    enum class Boundary { FixedEnds, Periodic };

    std::vector<Vec> points;
    Boundary boundary = Boundary::FixedEnds;
    Vec rotation;  // integer vector, Periodic only

    int segment_count() const {
        return boundary == Boundary::FixedEnds ? static_cast<int>(points.size()) - 1
                                               : static_cast<int>(points.size());
    }

    /// Endpoints of transition i (wraps with the rotation shift when periodic).
    std::pair<Vec, Vec> transition(int i) const;
};

/// Sum of S over transitions minus (segment count) * lbar.
double action(const GeneratingFunction& s, const Configuration& config, double lbar);

/// Gradient of the action with respect to the free points (interior points for
/// fixed ends, all points for periodic).
Vec action_gradient(const GeneratingFunction& s, const Configuration& config);

/// Hessian of the action in the free points (dense assembly of the
/// block-tridiagonal structure; cyclic corner blocks when periodic).
Mat action_hessian(const GeneratingFunction& s, const Configuration& config);

struct MinimizeOptions {
    int max_iters = 200;
    double grad_tol = 1e-10;
    int starts = 8;
    double perturb_scale = 0.25;
    std::uint64_t seed = 0x5eedULL;
};

struct MinimizeResult {
    Configuration config;
    bool converged = false;
    bool saddle = false;  // converged with an indefinite Hessian
    double grad_norm = 0.0;
    double value = 0.0;  // raw action (lbar = 0)
    int iters = 0;
};

/// Minimizes the fixed-ends action over interior points by damped Newton with
/// block-tridiagonal LU solves; multi-start from the straight line plus
/// Gaussian perturbations.  Throws NotConverged when no start converges.
MinimizeResult minimize_fixed_ends(const GeneratingFunction& s, const Vec& q_start, const Vec& q_end,
                                   int k, const std::optional<Configuration>& init = std::nullopt,
                                   const MinimizeOptions& opts = {});

struct PeriodicResult {
    Configuration config;
    double mean_action = 0.0;
    bool converged = false;
    bool saddle = false;
    double grad_norm = 0.0;
};

/// Minimizes the periodic action with q_N = q_0 + rho.
PeriodicResult minimize_periodic(const GeneratingFunction& s, const Vec& rho, int period,
                                 const std::optional<Configuration>& init = std::nullopt,
                                 const MinimizeOptions& opts = {});

/// A finite orbit piece.  Periodic segments extend to all of Z: the point at
/// index i + N is the point at i translated by (rotation, 0).
struct OrbitSegment {
    std::vector<AnnulusPoint> points;
    bool periodic = false;
    Vec rotation;

    int size() const { return static_cast<int>(points.size()); }
    AnnulusPoint at(long i) const;
};

/// Momentum lift of a critical configuration; verifies that forward maps each
/// point to the next within 1e-9.
OrbitSegment config_to_orbit(const GeneratingFunction& s, const Configuration& config);

struct StrongMinCheck {
    bool ok = true;
    double worst_margin = 0.0;  // min over competitors of F(competitor) - F(config)
    Configuration counterexample;
    int checked = 0;
};

/// Samples integer-translate competitors of varying length with re-minimized
/// interiors.  Probabilistic certificate only.
StrongMinCheck check_strong_min(const GeneratingFunction& s, const Configuration& config, double lbar,
                                int competitors, Rng& rng);

struct ManeResult {
    double value = 0.0;
    Configuration minimizer;
    Vec super_x;  // dS/dx at (x, x_1)
    Vec super_y;  // dS/dy at (x_{m-1}, y)
};

/// m-step action potential between x and y, with the orbit-derived
/// superdifferential pair.
ManeResult mane_potential(const GeneratingFunction& s, const Vec& x, const Vec& y, int m, double lbar,
                          const MinimizeOptions& opts = {});

struct HessianReport {
    Mat hessian;
    double min_eigenvalue = 0.0;
    bool vertical_transverse = false;  // DF^m V(x_0) transverse to V(x_m)
    double transversality_sigma = 0.0;
};

HessianReport hessian_fixed_ends(const GeneratingFunction& s, const Configuration& config);

}  // namespace twistlab::variational
