#include "twistlab/twist_map.hpp"

#include <cmath>

#include "twistlab/linalg.hpp"

namespace twistlab::maps {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

/// S = |Q-q|^2/2 + V(q) with a trigonometric polynomial V.  Covers the
/// integrable, standard, Froeschle and product families.
class KineticPotentialMap : public GeneratingFunction {
public:
    struct Term {
        double amplitude;  // a cos(2 pi w.q)
        Vec wave;          // integer wave vector
    };

    KineticPotentialMap(int n, std::vector<Term> terms) : n_(n), terms_(std::move(terms)) {}

    int dim() const override { return n_; }
    double alpha() const override { return 1.0; }

    double eval(const Vec& q, const Vec& Q) const override {
        double v = 0.5 * (Q - q).squaredNorm();
        for (const auto& t : terms_) v += t.amplitude * std::cos(kTwoPi * t.wave.dot(q));
        return v;
    }

    Vec grad_q(const Vec& q, const Vec& Q) const override {
        Vec g = q - Q;
        for (const auto& t : terms_)
            g -= t.amplitude * kTwoPi * std::sin(kTwoPi * t.wave.dot(q)) * t.wave;
        return g;
    }

    Vec grad_Q(const Vec& q, const Vec& Q) const override { return Q - q; }

    Mat hess_qq(const Vec& q, const Vec& Q) const override {
        (void)Q;
        Mat h = Mat::Identity(n_, n_);
        for (const auto& t : terms_)
            h -= t.amplitude * kTwoPi * kTwoPi * std::cos(kTwoPi * t.wave.dot(q)) *
                 (t.wave * t.wave.transpose());
        return h;
    }

    Mat hess_qQ(const Vec&, const Vec&) const override { return -Mat::Identity(n_, n_); }
    Mat hess_QQ(const Vec&, const Vec&) const override { return Mat::Identity(n_, n_); }

private:
    int n_;
    std::vector<Term> terms_;
};

Vec wave(std::initializer_list<double> entries) {
    Vec w(static_cast<Eigen::Index>(entries.size()));
    Eigen::Index i = 0;
    for (double e : entries) w[i++] = e;
    return w;
}

}  // namespace

MapPtr make_integrable(int n) { return std::make_shared<KineticPotentialMap>(n, std::vector<KineticPotentialMap::Term>{}); }

MapPtr make_standard(double eps) {
    std::vector<KineticPotentialMap::Term> terms{{eps / (4.0 * M_PI * M_PI), wave({1.0})}};
    return std::make_shared<KineticPotentialMap>(1, std::move(terms));
}

MapPtr make_froeschle(double eps1, double eps2, double mu) {
    const double c = 4.0 * M_PI * M_PI;
    std::vector<KineticPotentialMap::Term> terms{{eps1 / c, wave({1.0, 0.0})},
                                                 {eps2 / c, wave({0.0, 1.0})},
                                                 {mu / c, wave({1.0, 1.0})}};
    return std::make_shared<KineticPotentialMap>(2, std::move(terms));
}

MapPtr make_product(double eps1, double eps2) { return make_froeschle(eps1, eps2, 0.0); }

MapPtr make_family(const std::string& name, const std::vector<double>& params) {
    auto need = [&](std::size_t k) {
        if (params.size() != k)
            throw InvalidConfig("family '" + name + "' takes " + std::to_string(k) + " parameter(s)");
    };
    if (name == "integrable") {
        need(1);
        int n = static_cast<int>(params[0]);
        if (n < 1) throw InvalidConfig("integrable: dimension must be >= 1");
        return make_integrable(n);
    }
    if (name == "standard") {
        need(1);
        return make_standard(params[0]);
    }
    if (name == "froeschle") {
        need(3);
        return make_froeschle(params[0], params[1], params[2]);
    }
    if (name == "product") {
        need(2);
        return make_product(params[0], params[1]);
    }
    throw InvalidConfig("unknown map family '" + name + "'");
}

namespace {

/// Damped Newton for g(z) = 0 with Jacobian supplied by the caller.
Vec newton_solve(const std::function<Vec(const Vec&)>& g, const std::function<Mat(const Vec&)>& jac,
                 Vec z, double tol, int max_iters) {
    Vec r = g(z);
    for (int it = 0; it < max_iters; ++it) {
        if (r.norm() <= tol) return z;
        Vec step = jac(z).partialPivLu().solve(-r);
        double t = 1.0;
        for (int half = 0; half < 60; ++half) {
            Vec z_try = z + t * step;
            Vec r_try = g(z_try);
            if (r_try.norm() < r.norm()) {
                z = z_try;
                r = r_try;
                break;
            }
            t *= 0.5;
            if (half == 59) throw SolveDiverged("Newton step stalled");
        }
    }
    if (r.norm() <= tol) return z;
    throw SolveDiverged("Newton did not reach tolerance");
}

}  // namespace

AnnulusPoint forward(const GeneratingFunction& s, const AnnulusPoint& x) {
    const double tol = 1e-12 * (1.0 + x.p.norm());
    auto g = [&](const Vec& Q) -> Vec { return x.p + s.grad_q(x.q, Q); };
    auto j = [&](const Vec& Q) -> Mat { return s.hess_qQ(x.q, Q); };
    Vec q_new = newton_solve(g, j, x.q + x.p / s.alpha(), tol, 100);
    return {q_new, s.grad_Q(x.q, q_new)};
}

AnnulusPoint backward(const GeneratingFunction& s, const AnnulusPoint& x) {
    const double tol = 1e-12 * (1.0 + x.p.norm());
    auto g = [&](const Vec& q) -> Vec { return s.grad_Q(q, x.q) - x.p; };
    auto j = [&](const Vec& q) -> Mat { return s.hess_qQ(q, x.q).transpose(); };
    Vec q_prev = newton_solve(g, j, x.q - x.p / s.alpha(), tol, 100);
    return {q_prev, -s.grad_q(q_prev, x.q)};
}

Mat tangent(const GeneratingFunction& s, const Vec& q, const Vec& Q) {
    const int n = s.dim();
    Mat a = s.hess_qq(q, Q);
    Mat b = s.hess_qQ(q, Q);
    Mat c = s.hess_QQ(q, Q);
    Eigen::PartialPivLU<Mat> blu(b);
    if (std::abs(blu.determinant()) < 1e-14) throw TwistViolated("S_qQ is singular");
    Mat b_inv = blu.inverse();
    Mat df(2 * n, 2 * n);
    df.topLeftCorner(n, n) = -b_inv * a;
    df.topRightCorner(n, n) = -b_inv;
    df.bottomLeftCorner(n, n) = b.transpose() - c * b_inv * a;
    df.bottomRightCorner(n, n) = -c * b_inv;
    return df;
}

Mat symplectic_inverse(const Mat& m) {
    const int n = static_cast<int>(m.rows()) / 2;
    Mat inv(2 * n, 2 * n);
    inv.topLeftCorner(n, n) = m.bottomRightCorner(n, n).transpose();
    inv.topRightCorner(n, n) = -m.topRightCorner(n, n).transpose();
    inv.bottomLeftCorner(n, n) = -m.bottomLeftCorner(n, n).transpose();
    inv.bottomRightCorner(n, n) = m.topLeftCorner(n, n).transpose();
    return inv;
}

TwistCheck check_twist(const GeneratingFunction& s, Rng& rng, int samples) {
    TwistCheck out;
    out.alpha_estimate = std::numeric_limits<double>::infinity();
    const int n = s.dim();
    for (int k = 0; k < samples; ++k) {
        Vec q = rng.uniform_vec(n);
        Vec Q = q + rng.uniform_vec(n, -2.0, 2.0);
        Mat sym = linalg::symmetrize(s.hess_qQ(q, Q));
        double lam = linalg::min_eigenvalue(-sym);
        if (lam < out.alpha_estimate) {
            out.alpha_estimate = lam;
            out.witness_q = q;
            out.witness_Q = Q;
        }
    }
    out.ok = out.alpha_estimate > 0.0;
    return out;
}

}  // namespace twistlab::maps
