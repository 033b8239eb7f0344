#pragma once

#include <functional>

#include "twistlab/green.hpp"
#include "twistlab/symplectic.hpp"
#include "twistlab/types.hpp"
#include "twistlab/weak_kam.hpp"

namespace twistlab::geometry {

using green::GreenData;
using maps::GeneratingFunction;

struct ConeSample {
    Vec base;                     // phase-space point, 2n components
    std::vector<Vec> directions;  // unit vectors, one per cluster
    std::vector<int> weights;     // realizations per cluster
    std::vector<double> radii;    // schedule actually used
};

struct ConeOptions {
    double cluster_angle_deg = 5.0;
    int min_weight = 3;  // clusters realized by fewer samples are dropped
    int max_levels = 8;  // radius schedule r0 * 2^-j
};

/// Directions accumulated by normalized differences (s - a)/|s - a| over a
/// dyadic radius schedule, clustered by angle.
ConeSample contingent_cone(const std::vector<Vec>& samples, const Vec& a,
                           const std::vector<double>& radii, const ConeOptions& opts = {});

/// Union of contingent cones over the nearest sample points, re-clustered.
ConeSample limit_contingent_cone(const std::vector<Vec>& samples, const Vec& a, int neighbor_count,
                                 const std::vector<double>& radii, const ConeOptions& opts = {});

/// Dyadic schedule r0 * 2^-j, j = 0..levels-1.
std::vector<double> dyadic_radii(double r0, int levels);

/// Modified Green graph pair: (s- - c0 dS, s+ + c0 dS).
std::pair<Mat, Mat> modified_green(const GreenData& g);

struct ConeTheoremReport {
    int directions_checked = 0;
    int directions_passed = 0;
    double pass_rate = 1.0;  // vacuous cones pass
    double worst_margin = 0.0;
    bool passed = true;
};

/// Betweenness of every limit-contingent direction against the modified Green
/// bundles, graph matrices widened by tol I on both sides.
ConeTheoremReport verify_cone_theorem(const GeneratingFunction& s, const std::vector<Vec>& aubry_samples,
                                      const std::vector<Vec>& base_points,
                                      const std::function<GreenData(const Vec&)>& green_map, double tol,
                                      const ConeOptions& opts = {});

/// True iff max |omega(u, v)| over direction pairs is <= tol and the span of
/// the directions has dimension <= n.
bool c1_isotropic_check(const ConeSample& cone, const symplectic::SymplecticSpace& space, double tol);

struct PalgReport {
    struct Pair {
        Vec x_dir;       // X
        Vec y_dir;       // Y
        double margin;   // min slack over both inequalities and sampled k
        bool admits_sigma;
    };
    Mat a_yy;  // d2 A_m / dy2 at (x_-m, x)
    Mat a_xx;  // d2 A_m / dx2 at (x, x_m)
    std::vector<Pair> pairs;
    double worst_margin = 0.0;
    bool all_admit_sigma = true;
};

/// Difference-quotient (X, Y) pairs from nearby differentiability points of
/// u-, tested against both quadratic inequalities with the Mane Hessians at
/// finite-difference accuracy; each passing pair is fed to pbilin_construct.
PalgReport palg_inequality_check(const GeneratingFunction& s, const weakkam::WeakKamReport& report,
                                 const Vec& x, const std::vector<Vec>& nearby_points, int m,
                                 double fd_step = 1e-4, int k_samples = 64,
                                 std::uint64_t seed = 0x9a1eULL);

}  // namespace twistlab::geometry
