#pragma once

#include <optional>

#include "twistlab/symplectic.hpp"
#include "twistlab/twist_map.hpp"
#include "twistlab/types.hpp"
#include "twistlab/variational.hpp"

namespace twistlab::green {

using maps::GeneratingFunction;
using variational::OrbitSegment;

/// Graph matrices of the iterated verticals at one orbit point:
/// forward[k-1] is the graph of Df^k V(f^-k x), backward[k-1] of Df^-k V(f^k x).
struct GreenIterates {
    std::vector<Mat> forward;
    std::vector<Mat> backward;
};

/// Monotone sequences of iterated-vertical graphs; throws ConjugatePoint when
/// an image meets the vertical and MonotonicityViolation past roundoff slack.
GreenIterates green_iterates(const GeneratingFunction& s, const OrbitSegment& orbit, int k_max,
                             long center = 0);

struct GreenData {
    AnnulusPoint base;
    Mat s_minus;
    Mat s_plus;
    Mat delta_s;
    int p_dim = 0;
    std::optional<double> q_plus_val;
    int k_used = 0;
    bool converged = false;
    bool extrapolated = false;
    double rank_cutoff = 0.0;
};

/// Limits of the iterated verticals; on non-convergence within k_max a
/// two-term 1/k Richardson fit supplies the limit when `richardson` is set,
/// otherwise NotConverged is thrown.
GreenData green_bundles(const GeneratingFunction& s, const OrbitSegment& orbit, double tol, int k_max,
                        bool richardson = true, long center = 0);

struct DynamicalCriterion {
    bool bounded_forward = false;
    bool bounded_backward = false;
    double growth_forward = 0.0;   // max_k |q-part of Df^k v| / |v|
    double growth_backward = 0.0;
    double dist_to_g_minus = -1.0;  // filled when bounded forward
    double dist_to_g_plus = -1.0;   // filled when bounded backward
};

DynamicalCriterion dynamical_criterion_check(const GeneratingFunction& s, const OrbitSegment& orbit,
                                             const Vec& v, int horizon,
                                             const std::optional<GreenData>& data = std::nullopt,
                                             long center = 0);

struct SpectrumReport {
    std::vector<double> exponents;  // sorted descending, size 2n
    double tau = 0.0;
    int zero_count = 0;
    int pos_count = 0;
    int neg_count = 0;
    double pairing_defect = 0.0;
};

/// QR cocycle accumulation over N steps; a burn-in prefix is excluded from the
/// averages so periodic cocycles converge to machine accuracy.
SpectrumReport lyapunov_spectrum(const GeneratingFunction& s, const OrbitSegment& orbit, long n_steps,
                                 long burn_in = -1, double tau_override = -1.0, long start = 0);

/// Exponents of a periodic orbit from the monodromy eigenvalues, exact up to
/// the eigenvalue solve.
SpectrumReport periodic_spectrum(const GeneratingFunction& s, const OrbitSegment& orbit,
                                 double tau_override = -1.0);

/// sup over the orbit of |S_1 - S_-1| (spectral norm), the graph matrices of
/// Df V and Df^-1 V.
double c_constant(const GeneratingFunction& s, const OrbitSegment& orbit);

struct Thm1Report {
    int p = 0;
    SpectrumReport spectrum;
    SpectrumReport monodromy;
    std::vector<int> p_dims;
    bool passed = false;
};

/// Zero/positive/negative exponent counts against the modal Green intersection
/// dimension along a periodic minimizing orbit.
Thm1Report verify_thm1(const GeneratingFunction& s, const OrbitSegment& orbit, long n_steps,
                       double green_tol = 1e-10, double tau_override = -1.0);

struct Thm2Report {
    bool skipped = false;  // all exponents zero
    double lambda_mu = 0.0;
    double c_value = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    bool passed = false;
};

/// Checks lambda(mu) >= (1/T) sum over the orbit of log(1 + q+(dS)/C) / 2.
/// lambda(mu) comes from the periodic monodromy.
Thm2Report verify_thm2(const GeneratingFunction& s, const OrbitSegment& orbit, double green_tol = 1e-10,
                       double tol = 1e-6);

struct ReducedReport {
    bool trivial = false;  // p = 0 or reduced dimension 0
    int p_dim = 0;
    int reduced_dim = 0;
    bool transversal_ok = false;
    bool chain_ok = false;
    double limit_dist_forward = 0.0;
    double limit_dist_backward = 0.0;
    bool limits_ok = false;
    bool passed = false;
    std::string note;
};

/// Symplectic reduction by R = G- ∩ G+ and the order chain / transversality /
/// limit checks of the reduced vertical iterates.
ReducedReport reduced_green_diagnostics(const GeneratingFunction& s, const OrbitSegment& orbit,
                                        const GreenData& data, double tol, int k_limit = 10);

/// Max over one period of the distance between Df G±(x) and G±(f x).
double invariance_defect(const GeneratingFunction& s, const OrbitSegment& orbit, double tol, int k_max);

}  // namespace twistlab::green
