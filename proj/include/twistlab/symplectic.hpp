#pragma once

#include <optional>

#include "twistlab/linalg.hpp"
#include "twistlab/types.hpp"

namespace twistlab::symplectic {

/// Linear symplectic structure on R^{2n}: the form omega and the metric induced
/// by the compatible complex structure (identity for the standard form).
struct SymplecticSpace {
    int n = 0;
    Mat form;
    Mat metric;

    static SymplecticSpace standard(int n);

    double omega(const Vec& v, const Vec& w) const { return v.dot(form * w); }
};

/// A Lagrangian subspace of R^{2n} as a 2n x n spanning frame.  Frames built as
/// graphs over the horizontal remember their symmetric graph matrix.
struct LagrangianFrame {
    Mat columns;
    std::optional<Mat> graph;

    static LagrangianFrame horizontal(int n);
    static LagrangianFrame vertical(int n);
    static LagrangianFrame from_graph(const Mat& w);
    /// Validates rank and omega-isotropy against `form` (standard form if empty).
    static LagrangianFrame from_columns(const Mat& cols, const Mat* form = nullptr);

    int n() const { return static_cast<int>(columns.cols()); }

    /// Graph matrix over the horizontal; throws VerticalNotTransverse.
    Mat graph_matrix() const;

    LagrangianFrame transformed(const Mat& m) const;
};

enum class Relation { StrictlyUnder, Under, Incomparable };

struct ComparisonResult {
    Relation relation = Relation::Incomparable;
    Mat witness_form;
};

enum class ConeKind { InPositiveCone, OtherComponent, Degenerate };

struct ConeResult {
    ConeKind kind = ConeKind::Degenerate;
    int positive = 0;  // signature of the witness form
    int negative = 0;
    Mat witness_form;
};

inline constexpr double kTransversalityTol = 1e-10;

/// c0 = sqrt(13)/3 - 5/6, the band constant of the sigma construction.
inline const double kBandC0 = std::sqrt(13.0) / 3.0 - 5.0 / 6.0;

/// Matrix of q(L1, L2; L) in the basis of L1: for each basis vector v of L1 the
/// unique l(v) in L2 with v + l(v) in L gives q(v) = omega(v, l(v)).
Mat relative_form(const LagrangianFrame& l1, const LagrangianFrame& l2, const LagrangianFrame& l,
                  const Mat& form);
Mat relative_form(const LagrangianFrame& l1, const LagrangianFrame& l2, const LagrangianFrame& l);

/// Membership of L in the positive cone P(L1, L2), or the signature component it lies in.
ConeResult cone_membership(const LagrangianFrame& l1, const LagrangianFrame& l2, const LagrangianFrame& l,
                           const Mat& form);
ConeResult cone_membership(const LagrangianFrame& l1, const LagrangianFrame& l2, const LagrangianFrame& l);

/// Order of L1 against L2 relative to the distinguished `vertical` frame:
/// StrictlyUnder iff q(L1, vertical; L2) is positive definite.
ComparisonResult compare_under(const LagrangianFrame& l1, const LagrangianFrame& l2,
                               const LagrangianFrame& vertical, const Mat& form);
ComparisonResult compare_under_vertical(const LagrangianFrame& l1, const LagrangianFrame& l2);

/// Symplectic quotient F = E / R of a coisotropic subspace E with E^perp = R.
struct ReducedSpace {
    SymplecticSpace ambient;
    Mat basis;         // 2n x 2(n-p) representatives of a basis of F
    Mat r_frame;       // 2n x p
    Mat projector;     // 2(n-p) x 2n, coordinates of p(v) in `basis`
    Mat reduced_form;  // Omega on F
    int reduced_dim = 0;

    Vec project(const Vec& v) const { return projector * v; }
    Mat project_frame(const Mat& frame) const { return projector * frame; }

    /// Image of a Lagrangian of the ambient space: p((L ∩ E) + R), Lagrangian in F.
    Mat reduce_lagrangian(const Mat& l_columns) const;
};

ReducedSpace symplectic_reduce(const Mat& e_frame, const Mat& r_frame, const SymplecticSpace& space);

/// True iff some Lagrangian graph W with W- <= W <= W+ contains v.  Vertical
/// vectors (zero horizontal component) are in no graph and return false.
bool between_check(const Vec& v, const LagrangianFrame& l_minus, const LagrangianFrame& l_plus);
bool between_check_graphs(const Vec& v, const Mat& w_minus, const Mat& w_plus);

/// Slacks of the two quadratic hypothesis inequalities, minimized in closed form
/// over K.  Negative slack (or a range residual) means the hypothesis fails.
struct PbilinHypotheses {
    double slack_upper = 0.0;  // inf_K [ rhs1(K) - Y.K ]
    double slack_lower = 0.0;  // inf_K [ Y.K - lhs2(K) ]
    double range_residual = 0.0;
    Vec worst_k_upper;
    Vec worst_k_lower;
    bool ok(double tol = 1e-9) const {
        return slack_upper >= -tol && slack_lower >= -tol && range_residual <= tol;
    }
};

PbilinHypotheses pbilin_hypotheses(const Mat& q_minus, const Mat& q_plus, const Vec& x, const Vec& y);

/// Constructs sigma with Q- - c0 dQ <= sigma <= Q+ + c0 dQ and sigma X = Y,
/// following the restriction to range(dQ), the dQ^(1/2) change of coordinates,
/// the rotation of x onto e1 and the bordered matrix with -1/2 diagonal tail.
Mat pbilin_construct(const Mat& q_minus, const Mat& q_plus, const Vec& x, const Vec& y);

}  // namespace twistlab::symplectic
