#pragma once

#include "twistlab/rng.hpp"
#include "twistlab/types.hpp"

namespace twistlab::linalg {

/// Matrix of the standard symplectic form: omega(v, w) = v^T J w with (q, p) block order.
Mat standard_form(int n);

Mat symmetrize(const Mat& m);

/// Eigenvalues of a symmetric matrix, ascending.
Vec sym_eigenvalues(const Mat& m);

double min_eigenvalue(const Mat& m);
double max_abs_eigenvalue(const Mat& m);

/// PSD test with relative slack: lambda_min >= -slack * max(1, |lambda|_max).
bool is_psd(const Mat& m, double rel_slack = 1e-9);
bool is_pd(const Mat& m, double rel_slack = 1e-9);

/// Moore-Penrose pseudo-inverse of a symmetric matrix, relative rank cutoff on |eigenvalue|.
Mat pinv_sym(const Mat& m, double rel_cutoff = 1e-10);

/// Symmetric square root of an SPD matrix.
Mat sqrt_spd(const Mat& m);

/// Thin orthonormal basis of the column space (rank revealed by SVD at rel_cutoff).
Mat orthonormal_basis(const Mat& a, double rel_cutoff = 1e-12);

/// Orthonormal basis of the intersection of two column spaces.
Mat subspace_intersection(const Mat& a, const Mat& b, double rel_cutoff = 1e-9);

/// Smallest singular value of [orth(A) orth(B)]; zero iff the spans share a direction.
double transversality_margin(const Mat& a, const Mat& b);

/// Largest principal angle distance between two subspaces of equal dimension,
/// measured as the spectral norm of the difference of orthogonal projectors.
double subspace_distance(const Mat& a, const Mat& b);

/// Householder orthogonal matrix mapping e1 to the unit vector x/|x|.
Mat rotation_to_e1(const Vec& x);

Mat random_symmetric(Rng& rng, int n, double scale = 1.0);
Mat random_psd(Rng& rng, int n, double scale = 1.0);
Mat random_spd(Rng& rng, int n, double scale = 1.0);

/// Random symplectic matrix: product of shears and a block-diagonal GL factor.
Mat random_symplectic(Rng& rng, int n, double scale = 0.6);

}  // namespace twistlab::linalg
