#pragma once

#include <functional>
#include <memory>

#include "twistlab/rng.hpp"
#include "twistlab/types.hpp"

namespace twistlab::maps {

/// Generating function S(q, Q) of a globally positive diffeomorphism.
/// S is Z^n-periodic under joint integer shifts of (q, Q) and satisfies the
/// twist bound v^T S_qQ v <= -alpha |v|^2.
class GeneratingFunction {
public:
    virtual ~GeneratingFunction() = default;

    virtual int dim() const = 0;
    virtual double alpha() const = 0;

    virtual double eval(const Vec& q, const Vec& Q) const = 0;
    virtual Vec grad_q(const Vec& q, const Vec& Q) const = 0;
    virtual Vec grad_Q(const Vec& q, const Vec& Q) const = 0;
    virtual Mat hess_qq(const Vec& q, const Vec& Q) const = 0;
    virtual Mat hess_qQ(const Vec& q, const Vec& Q) const = 0;
    virtual Mat hess_QQ(const Vec& q, const Vec& Q) const = 0;
};

using MapPtr = std::shared_ptr<const GeneratingFunction>;

/// S = |Q - q|^2 / 2, any dimension.
MapPtr make_integrable(int n);

/// S = (Q - q)^2 / 2 + (eps / 4 pi^2) cos(2 pi q), n = 1.
MapPtr make_standard(double eps);

/// Two coupled standard factors, n = 2:
/// S = sum of the factor terms + (mu / 4 pi^2) cos(2 pi (q1 + q2)).
MapPtr make_froeschle(double eps1, double eps2, double mu);

/// Uncoupled product of two one-dimensional standard maps, n = 2.
MapPtr make_product(double eps1, double eps2);

/// Family lookup used by the CLI; throws InvalidConfig on unknown name.
MapPtr make_family(const std::string& name, const std::vector<double>& params);

/// Arbitrary S from closures (test support).
class CustomGeneratingFunction : public GeneratingFunction {
public:
    using Scalar2 = std::function<double(const Vec&, const Vec&)>;
    using Vector2 = std::function<Vec(const Vec&, const Vec&)>;
    using Matrix2 = std::function<Mat(const Vec&, const Vec&)>;

    CustomGeneratingFunction(int n, double alpha, Scalar2 f, Vector2 gq, Vector2 gQ, Matrix2 hqq,
                             Matrix2 hqQ, Matrix2 hQQ)
        : n_(n), alpha_(alpha), f_(std::move(f)), gq_(std::move(gq)), gQ_(std::move(gQ)),
          hqq_(std::move(hqq)), hqQ_(std::move(hqQ)), hQQ_(std::move(hQQ)) {}

    int dim() const override { return n_; }
    double alpha() const override { return alpha_; }
    double eval(const Vec& q, const Vec& Q) const override { return f_(q, Q); }
    Vec grad_q(const Vec& q, const Vec& Q) const override { return gq_(q, Q); }
    Vec grad_Q(const Vec& q, const Vec& Q) const override { return gQ_(q, Q); }
    Mat hess_qq(const Vec& q, const Vec& Q) const override { return hqq_(q, Q); }
    Mat hess_qQ(const Vec& q, const Vec& Q) const override { return hqQ_(q, Q); }
    Mat hess_QQ(const Vec& q, const Vec& Q) const override { return hQQ_(q, Q); }

private:
    int n_;
    double alpha_;
    Scalar2 f_;
    Vector2 gq_, gQ_;
    Matrix2 hqq_, hqQ_, hQQ_;
};

/// One step of the lifted map: solves p = -S_q(q, Q) for Q by damped Newton,
/// then P = S_Q(q, Q).  Residual <= 1e-12 (1 + |p|).
AnnulusPoint forward(const GeneratingFunction& s, const AnnulusPoint& x);

/// Inverse step: solves P = S_Q(q, Q) for q, then p = -S_q(q, Q).
AnnulusPoint backward(const GeneratingFunction& s, const AnnulusPoint& x);

/// DF at the transition (q, Q), acting on (dq, dp):
///   [[-b^-1 a, -b^-1], [b^T - c b^-1 a, -c b^-1]]
/// with a = S_qq, b = S_qQ, c = S_QQ.  Symplectic by construction.
Mat tangent(const GeneratingFunction& s, const Vec& q, const Vec& Q);

/// Inverse of a symplectic block matrix: [[D^T, -B^T], [-C^T, A^T]].
Mat symplectic_inverse(const Mat& m);

struct TwistCheck {
    double alpha_estimate = 0.0;
    bool ok = false;
    Vec witness_q, witness_Q;  // worst sample when the bound fails
};

/// Empirical twist constant: min over samples of the smallest eigenvalue of
/// -sym(S_qQ).  A non-positive value comes with the violating sample.
TwistCheck check_twist(const GeneratingFunction& s, Rng& rng, int samples);

}  // namespace twistlab::maps
