#include "twistlab/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace twistlab::linalg {

Mat standard_form(int n) {
    Mat j = Mat::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = Mat::Identity(n, n);
    j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return j;
}

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

Vec sym_eigenvalues(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double min_eigenvalue(const Mat& m) { return sym_eigenvalues(m).minCoeff(); }

double max_abs_eigenvalue(const Mat& m) {
    Vec ev = sym_eigenvalues(m);
    return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
}

bool is_psd(const Mat& m, double rel_slack) {
    Vec ev = sym_eigenvalues(m);
    double scale = std::max(1.0, std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff())));
    return ev.minCoeff() >= -rel_slack * scale;
}

bool is_pd(const Mat& m, double rel_slack) {
    Vec ev = sym_eigenvalues(m);
    double scale = std::max(1.0, std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff())));
    return ev.minCoeff() > rel_slack * scale;
}

Mat pinv_sym(const Mat& m, double rel_cutoff) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m));
    Vec ev = es.eigenvalues();
    double cutoff = rel_cutoff * std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
    Vec inv = Vec::Zero(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i]) > cutoff) inv[i] = 1.0 / ev[i];
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Mat sqrt_spd(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m));
    Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Mat orthonormal_basis(const Mat& a, double rel_cutoff) {
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return Mat(a.rows(), 0);
    double cutoff = rel_cutoff * sv[0];
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv[rank] > cutoff) ++rank;
    return svd.matrixU().leftCols(rank);
}

Mat subspace_intersection(const Mat& a, const Mat& b, double rel_cutoff) {
    // Nullspace of [A -B] maps to intersection vectors A x.
    Mat ua = orthonormal_basis(a);
    Mat ub = orthonormal_basis(b);
    Mat stacked(ua.rows(), ua.cols() + ub.cols());
    stacked << ua, -ub;
    Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    std::vector<Eigen::Index> null_cols;
    for (Eigen::Index i = 0; i < svd.matrixV().cols(); ++i) {
        double s = (i < sv.size()) ? sv[i] : 0.0;
        if (s <= rel_cutoff * (sv.size() ? sv[0] : 1.0)) null_cols.push_back(i);
    }
    Mat inter(ua.rows(), static_cast<Eigen::Index>(null_cols.size()));
    for (std::size_t k = 0; k < null_cols.size(); ++k)
        inter.col(static_cast<Eigen::Index>(k)) = ua * svd.matrixV().col(null_cols[k]).head(ua.cols());
    return orthonormal_basis(inter, 1e-9);
}

double transversality_margin(const Mat& a, const Mat& b) {
    Mat ua = orthonormal_basis(a);
    Mat ub = orthonormal_basis(b);
    Mat stacked(ua.rows(), ua.cols() + ub.cols());
    stacked << ua, ub;
    Eigen::JacobiSVD<Mat> svd(stacked);
    return svd.singularValues().minCoeff();
}

double subspace_distance(const Mat& a, const Mat& b) {
    Mat ua = orthonormal_basis(a);
    Mat ub = orthonormal_basis(b);
    Mat pa = ua * ua.transpose();
    Mat pb = ub * ub.transpose();
    Eigen::JacobiSVD<Mat> svd(pa - pb);
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

Mat rotation_to_e1(const Vec& x) {
    const Eigen::Index d = x.size();
    double nx = x.norm();
    Mat u = Mat::Identity(d, d);
    if (nx == 0.0) return u;
    Vec e1 = Vec::Zero(d);
    e1[0] = 1.0;
    Vec w = x / nx - e1;
    double nw2 = w.squaredNorm();
    if (nw2 < 1e-30) return u;
    // Householder reflection sending e1 to x/|x|.
    return u - (2.0 / nw2) * (w * w.transpose());
}

Mat random_symmetric(Rng& rng, int n, double scale) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = m(j, i) = scale * rng.normal();
    return m;
}

Mat random_psd(Rng& rng, int n, double scale) {
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    return scale * (g * g.transpose()) / n;
}

Mat random_spd(Rng& rng, int n, double scale) {
    return random_psd(rng, n, scale) + 0.05 * scale * Mat::Identity(n, n);
}

Mat random_symplectic(Rng& rng, int n, double scale) {
    Mat b = random_symmetric(rng, n, scale);
    Mat c = random_symmetric(rng, n, scale);
    Mat a = Mat::Identity(n, n) + random_symmetric(rng, n, scale * 0.5);
    while (std::abs(a.determinant()) < 0.1) a = Mat::Identity(n, n) + random_symmetric(rng, n, scale * 0.5);
    Mat m = Mat::Zero(2 * n, 2 * n);
    // [[A,0],[0,A^-T]] * [[I,B],[0,I]] * [[I,0],[C,I]]
    Mat inner = Mat::Identity(2 * n, 2 * n);
    inner.topRightCorner(n, n) = b;
    Mat lower = Mat::Identity(2 * n, 2 * n);
    lower.bottomLeftCorner(n, n) = c;
    m.topLeftCorner(n, n) = a;
    m.bottomRightCorner(n, n) = a.inverse().transpose();
    return m * inner * lower;
}

}  // namespace twistlab::linalg
