#pragma once

#include "twistlab/twist_map.hpp"
#include "twistlab/types.hpp"

namespace twistlab::weakkam {

using maps::GeneratingFunction;

enum class Kind { Backward, Forward };

/// Values of a Z^n-periodic function on the uniform grid over [0,1)^n,
/// row-major with the first coordinate slowest.
struct SubactionGrid {
    int n = 1;
    int resolution = 0;
    Kind kind = Kind::Backward;
    double residual = 0.0;
    std::vector<double> values;

    static SubactionGrid zeros(int n, int resolution, Kind kind);

    std::size_t size() const { return values.size(); }
    double spacing() const { return 1.0 / resolution; }

    Vec node(std::size_t idx) const;
    std::size_t index(const std::vector<int>& coords) const;

    /// Periodic multilinear interpolation.
    double value_at(const Vec& x) const;

    /// Central-difference gradient at a grid node.
    Vec gradient_at_node(std::size_t idx) const;

    void normalize_min_zero();
};

struct SweepOptions {
    int translate_radius = 1;
    double prune_radius = 2.5;  // skip sources farther than this in sup norm
    bool refine = false;        // one continuous descent step around the grid argmin
    int threads = 0;            // 0 = hardware
};

/// One Lax-Oleinik sweep; no normalization.
SubactionGrid lax_sweep(const GeneratingFunction& s, const SubactionGrid& u, double lbar, Kind kind,
                        const SweepOptions& opts = {});

/// Backward operator as an operation: sweep then renormalize to min 0.
SubactionGrid lax_oleinik_backward(const GeneratingFunction& s, const SubactionGrid& u, double lbar,
                                   const SweepOptions& opts = {});

/// Effective value: min over periods 1..max_period and |rho|_inf <= 1 of the
/// mean action of the periodic minimizer.
double estimate_lbar(const GeneratingFunction& s, int max_period, std::uint64_t seed = 0x1ba5ULL);

struct SolveReport {
    SubactionGrid u;
    bool converged = false;
    int iters = 0;
    std::vector<double> increments;
    double semiconcavity_max = 0.0;  // max upper second difference / h^2 (Backward)
};

SolveReport solve_calibrated(const GeneratingFunction& s, Kind kind, double lbar, double tol,
                             int max_iters, int resolution = 0, const SweepOptions& opts = {});

struct ContactPair {
    Vec x;
    Vec y;
    double defect = 0.0;
};

struct WeakKamReport {
    double lbar = 0.0;
    SubactionGrid u_minus;
    SubactionGrid u_plus;
    std::vector<std::size_t> coincidence;  // grid cells with u+ - u- <= tol_I
    std::vector<ContactPair> contact_pairs;
    double tol_I = 0.0;
    double conjugacy_residual = 0.0;
};

/// Conjugate pair: iterates the forward operator from u- and pins the additive
/// constant so that max(u- - u+) = 0.
WeakKamReport conjugate_pair(const GeneratingFunction& s, const SubactionGrid& u_minus, double lbar,
                             double tol = 1e-9, int max_iters = 20000, double tol_I = -1.0,
                             const SweepOptions& opts = {});

/// Calibration defect u(y) - u(x) - (S(x,y) - lbar), interpolating u off-grid.
double contact_defect(const GeneratingFunction& s, const SubactionGrid& u, double lbar, const Vec& x,
                      const Vec& y);

struct SigmaSet {
    std::vector<Vec> minimizers;  // positions in the cover
    double global_min = 0.0;
    bool singleton = false;
    Vec superdifferential;  // dS/dy(x, y) when singleton
};

/// Near-global minimizers of x -> u-(x) + S(x,y) - lbar over the grid plus
/// unit translates, clustered; singleton iff u- looks differentiable at y.
SigmaSet sigma_set(const GeneratingFunction& s, const SubactionGrid& u_minus, const Vec& y, double lbar,
                   double tol_sigma = 1e-6);

}  // namespace twistlab::weakkam
