#include "twistlab/symplectic.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace twistlab::symplectic {

SymplecticSpace SymplecticSpace::standard(int n) {
    SymplecticSpace s;
    s.n = n;
    s.form = linalg::standard_form(n);
    s.metric = Mat::Identity(2 * n, 2 * n);
    return s;
}

LagrangianFrame LagrangianFrame::horizontal(int n) { return from_graph(Mat::Zero(n, n)); }

LagrangianFrame LagrangianFrame::vertical(int n) {
    LagrangianFrame f;
    f.columns = Mat::Zero(2 * n, n);
    f.columns.bottomRows(n) = Mat::Identity(n, n);
    return f;
}

LagrangianFrame LagrangianFrame::from_graph(const Mat& w) {
    const int n = static_cast<int>(w.rows());
    LagrangianFrame f;
    f.columns = Mat::Zero(2 * n, n);
    f.columns.topRows(n) = Mat::Identity(n, n);
    f.columns.bottomRows(n) = linalg::symmetrize(w);
    f.graph = linalg::symmetrize(w);
    return f;
}

LagrangianFrame LagrangianFrame::from_columns(const Mat& cols, const Mat* form) {
    const int n = static_cast<int>(cols.cols());
    if (cols.rows() != 2 * n) throw std::invalid_argument("frame must be 2n x n");
    Eigen::JacobiSVD<Mat> svd(cols);
    if (svd.singularValues().minCoeff() <= 1e-12 * svd.singularValues().maxCoeff())
        throw std::invalid_argument("frame columns are rank deficient");
    Mat j = form ? *form : linalg::standard_form(n);
    double iso = (cols.transpose() * j * cols).cwiseAbs().maxCoeff();
    double scale = cols.squaredNorm();
    if (iso > 1e-12 * std::max(1.0, scale)) throw std::invalid_argument("frame is not omega-isotropic");
    LagrangianFrame f;
    f.columns = cols;
    return f;
}

Mat LagrangianFrame::graph_matrix() const {
    if (graph) return *graph;
    const int nn = n();
    Mat a = columns.topRows(nn);
    Eigen::JacobiSVD<Mat> svd(a);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    if (smin <= kTransversalityTol * std::max(1.0, smax))
        throw VerticalNotTransverse("frame is not transverse to the vertical");
    Mat w = columns.bottomRows(nn) * a.inverse();
    return linalg::symmetrize(w);
}

LagrangianFrame LagrangianFrame::transformed(const Mat& m) const {
    LagrangianFrame f;
    f.columns = m * columns;
    return f;
}

namespace {

void require_transverse(const Mat& a, const Mat& b, const char* what) {
    if (linalg::transversality_margin(a, b) <= kTransversalityTol)
        throw NotTransverse(what);
}

}  // namespace

Mat relative_form(const LagrangianFrame& l1, const LagrangianFrame& l2, const LagrangianFrame& l,
                  const Mat& form) {
    require_transverse(l1.columns, l2.columns, "L1 and L2 are not transverse");
    require_transverse(l.columns, l2.columns, "L and L2 are not transverse");
    const int n = l1.n();
    // Solve A e_i + B beta_i = C gamma_i for each basis vector of L1.
    Mat lhs(2 * n, 2 * n);
    lhs << l2.columns, -l.columns;
    Mat sol = lhs.partialPivLu().solve(-l1.columns);
    Mat beta = sol.topRows(n);  // coefficients of l(v) in the basis of L2
    Mat q = l1.columns.transpose() * form * (l2.columns * beta);
    return linalg::symmetrize(q);
}

Mat relative_form(const LagrangianFrame& l1, const LagrangianFrame& l2, const LagrangianFrame& l) {
    return relative_form(l1, l2, l, linalg::standard_form(l1.n()));
}

ConeResult cone_membership(const LagrangianFrame& l1, const LagrangianFrame& l2, const LagrangianFrame& l,
                           const Mat& form) {
    ConeResult r;
    r.witness_form = relative_form(l1, l2, l, form);
    Vec ev = linalg::sym_eigenvalues(r.witness_form);
    double big = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
    double cut = 1e-10 * std::max(1.0, big);
    int pos = 0, neg = 0, zero = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] > cut)
            ++pos;
        else if (ev[i] < -cut)
            ++neg;
        else
            ++zero;
    }
    r.positive = pos;
    r.negative = neg;
    if (zero > 0)
        r.kind = ConeKind::Degenerate;
    else if (neg == 0)
        r.kind = ConeKind::InPositiveCone;
    else
        r.kind = ConeKind::OtherComponent;
    return r;
}

ConeResult cone_membership(const LagrangianFrame& l1, const LagrangianFrame& l2, const LagrangianFrame& l) {
    return cone_membership(l1, l2, l, linalg::standard_form(l1.n()));
}

ComparisonResult compare_under(const LagrangianFrame& l1, const LagrangianFrame& l2,
                               const LagrangianFrame& vertical, const Mat& form) {
    if (linalg::transversality_margin(l1.columns, vertical.columns) <= kTransversalityTol ||
        linalg::transversality_margin(l2.columns, vertical.columns) <= kTransversalityTol)
        throw VerticalNotTransverse("comparison requires frames transverse to the vertical");
    ComparisonResult r;
    r.witness_form = relative_form(l1, vertical, l2, form);
    Vec ev = linalg::sym_eigenvalues(r.witness_form);
    double scale = std::max(1.0, std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff())));
    if (ev.minCoeff() > 1e-10 * scale)
        r.relation = Relation::StrictlyUnder;
    else if (ev.minCoeff() >= -1e-9 * scale)
        r.relation = Relation::Under;
    else
        r.relation = Relation::Incomparable;
    return r;
}

ComparisonResult compare_under_vertical(const LagrangianFrame& l1, const LagrangianFrame& l2) {
    const int n = l1.n();
    return compare_under(l1, l2, LagrangianFrame::vertical(n), linalg::standard_form(n));
}

ReducedSpace symplectic_reduce(const Mat& e_frame, const Mat& r_frame, const SymplecticSpace& space) {
    const int two_n = static_cast<int>(space.form.rows());
    const int p = static_cast<int>(r_frame.cols());
    const int fdim = static_cast<int>(e_frame.cols()) - p;

    // R must be omega-orthogonal to all of E.
    double viol = (r_frame.transpose() * space.form * e_frame).cwiseAbs().maxCoeff();
    double scale = std::max(1.0, r_frame.norm() * e_frame.norm());
    if (viol > 1e-10 * scale) throw NotCoisotropic("omega does not vanish on R x E");
    // R must lie inside E.
    Mat ue = linalg::orthonormal_basis(e_frame);
    Mat resid = r_frame - ue * (ue.transpose() * r_frame);
    if (resid.norm() > 1e-10 * std::max(1.0, r_frame.norm()))
        throw NotCoisotropic("R is not contained in E");

    ReducedSpace red;
    red.ambient = space;
    red.r_frame = r_frame;
    red.reduced_dim = fdim;

    // Basis of F: directions of E orthogonal to R.
    Mat ur = linalg::orthonormal_basis(r_frame);
    Mat compl_in_e = ue - ur * (ur.transpose() * ue);
    red.basis = linalg::orthonormal_basis(compl_in_e, 1e-9).leftCols(fdim);

    // Coordinates of p(v): solve [basis R] [c; d] = v in least squares.
    Mat stacked(two_n, fdim + p);
    stacked << red.basis, r_frame;
    Mat pinv = (stacked.transpose() * stacked).ldlt().solve(stacked.transpose());
    red.projector = pinv.topRows(fdim);

    red.reduced_form = red.basis.transpose() * space.form * red.basis;
    // Omega must be invertible on F.
    if (fdim > 0) {
        Eigen::JacobiSVD<Mat> svd(red.reduced_form);
        if (svd.singularValues().minCoeff() < 1e-10 * std::max(1.0, svd.singularValues().maxCoeff()))
            throw NotCoisotropic("reduced form is degenerate");
    }
    return red;
}

Mat ReducedSpace::reduce_lagrangian(const Mat& l_columns) const {
    Mat e_all(basis.rows(), basis.cols() + r_frame.cols());
    e_all << basis, r_frame;
    Mat cap = linalg::subspace_intersection(l_columns, e_all);
    Mat sum(basis.rows(), cap.cols() + r_frame.cols());
    sum << cap, r_frame;
    return linalg::orthonormal_basis(projector * sum, 1e-9);
}

bool between_check_graphs(const Vec& v, const Mat& w_minus, const Mat& w_plus) {
    const int n = static_cast<int>(w_minus.rows());
    Mat d = linalg::symmetrize(w_plus - w_minus);
    if (linalg::min_eigenvalue(d) < -1e-10 * std::max(1.0, linalg::max_abs_eigenvalue(d)))
        throw NotOrdered("W+ - W- has a negative eigenvalue");
    Vec a = v.head(n);
    Vec b = v.tail(n);
    if (a.norm() <= 1e-14 * std::max(1.0, v.norm())) return b.norm() <= 1e-14 * std::max(1.0, v.norm());
    Vec u = b - w_minus * a;
    double un = u.norm();
    if (un <= 1e-12 * std::max(1.0, v.norm())) return true;  // v already on graph(W-)
    Mat dp = linalg::pinv_sym(d, 1e-10);
    // u must lie in range(D).
    Vec proj = d * (dp * u);
    if ((u - proj).norm() > 1e-9 * un) return false;
    double lhs = u.dot(dp * u);
    double rhs = u.dot(a);
    return lhs <= rhs + 1e-9 * std::max(1.0, std::abs(rhs));
}

bool between_check(const Vec& v, const LagrangianFrame& l_minus, const LagrangianFrame& l_plus) {
    return between_check_graphs(v, l_minus.graph_matrix(), l_plus.graph_matrix());
}

PbilinHypotheses pbilin_hypotheses(const Mat& q_minus, const Mat& q_plus, const Vec& x, const Vec& y) {
    Mat dq = linalg::symmetrize(q_plus - q_minus);
    if (linalg::min_eigenvalue(dq) < -1e-9 * std::max(1.0, linalg::max_abs_eigenvalue(dq)))
        throw NotOrdered("Q+ - Q- is not positive semidefinite");
    Vec dy_plus = y - q_plus * x;
    Vec dy_minus = y - q_minus * x;
    Mat dqp = linalg::pinv_sym(dq, 1e-10);

    PbilinHypotheses h;
    // Both inequalities reduce to quadratics in K whose infimum over K is closed form,
    // finite only when dY lies in range(dQ).
    Vec pp = dq * (dqp * dy_plus);
    Vec pm = dq * (dqp * dy_minus);
    double scale = std::max(1.0, dy_plus.norm() + dy_minus.norm());
    h.range_residual = std::max((dy_plus - pp).norm(), (dy_minus - pm).norm()) / scale;
    h.slack_upper = -0.5 * dy_plus.dot(dqp * dy_plus) - dy_plus.dot(x);
    h.slack_lower = -0.5 * dy_minus.dot(dqp * dy_minus) + dy_minus.dot(x);
    h.worst_k_upper = x + dqp * dy_plus;
    h.worst_k_lower = x - dqp * dy_minus;
    return h;
}

Mat pbilin_construct(const Mat& q_minus, const Mat& q_plus, const Vec& x, const Vec& y) {
    const int n = static_cast<int>(q_minus.rows());
    Mat dq = linalg::symmetrize(q_plus - q_minus);
    PbilinHypotheses h = pbilin_hypotheses(q_minus, q_plus, x, y);
    if (h.range_residual > 1e-9)
        throw HypothesisViolated("Y - Q X leaves the range of Q+ - Q-", h.worst_k_upper);
    if (h.slack_upper < -1e-9) throw HypothesisViolated("upper inequality fails", h.worst_k_upper);
    if (h.slack_lower < -1e-9) throw HypothesisViolated("lower inequality fails", h.worst_k_lower);

    // Restrict to range(dQ).
    Eigen::SelfAdjointEigenSolver<Mat> es(dq);
    Vec ev = es.eigenvalues();
    double cut = 1e-10 * std::max(1.0, std::abs(ev.maxCoeff()));
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > cut) keep.push_back(i);
    const int d = static_cast<int>(keep.size());
    if (d == 0) return linalg::symmetrize(q_plus);  // dQ = 0 forces sigma = Q+ = Q-

    Mat p_range(n, d);
    Vec lam(d);
    for (int i = 0; i < d; ++i) {
        p_range.col(i) = es.eigenvectors().col(keep[i]);
        lam[i] = ev[keep[i]];
    }
    Vec lam_sqrt = lam.cwiseSqrt();

    // Coordinates on range(dQ) where dQ is the identity.
    Vec xr = lam_sqrt.asDiagonal() * (p_range.transpose() * x);             // x = dQ^(1/2) X
    Vec dy_plus = y - linalg::symmetrize(q_plus) * x;
    Vec yr = lam_sqrt.cwiseInverse().asDiagonal() * (p_range.transpose() * dy_plus);

    Mat s_small;
    double mu = xr.norm();
    if (mu <= 1e-13 * std::max(1.0, yr.norm() + 1.0)) {
        s_small = Mat::Zero(d, d);  // hypotheses force y = 0 here
    } else {
        Mat rot = linalg::rotation_to_e1(xr);  // rot * e1 = xr / mu
        Vec yt = rot.transpose() * yr / mu;
        Mat s = Mat::Zero(d, d);
        s(0, 0) = yt[0];
        for (int i = 1; i < d; ++i) {
            s(0, i) = s(i, 0) = yt[i];
            s(i, i) = -0.5;
        }
        s_small = rot * s * rot.transpose();
    }

    // sigma = Q+ + dQ^(1/2) S dQ^(1/2) extended by zero across ker(dQ).
    Mat eta = p_range * (lam_sqrt.asDiagonal() * s_small * lam_sqrt.asDiagonal()) * p_range.transpose();
    return linalg::symmetrize(q_plus) + linalg::symmetrize(eta);
}

}  // namespace twistlab::symplectic
