#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A point of the annulus lifted to the universal cover: q in R^n, momentum p in R^n.
struct AnnulusPoint {
    Vec q;
    Vec p;

    AnnulusPoint() = default;
    AnnulusPoint(Vec q_, Vec p_) : q(std::move(q_)), p(std::move(p_)) {}

    int dim() const { return static_cast<int>(q.size()); }

    /// Phase-space vector (q, p) in R^{2n}.
    Vec phase() const {
        Vec v(2 * q.size());
        v << q, p;
        return v;
    }

    /// q reduced mod 1 componentwise, for display.
    Vec q_mod1() const {
        Vec r = q;
        for (Eigen::Index i = 0; i < r.size(); ++i) r[i] -= std::floor(r[i]);
        return r;
    }
};

struct NotTransverse : std::runtime_error {
    explicit NotTransverse(const std::string& what) : std::runtime_error(what) {}
};

struct VerticalNotTransverse : std::runtime_error {
    explicit VerticalNotTransverse(const std::string& what) : std::runtime_error(what) {}
};

struct NotCoisotropic : std::runtime_error {
    explicit NotCoisotropic(const std::string& what) : std::runtime_error(what) {}
};

struct NotOrdered : std::runtime_error {
    explicit NotOrdered(const std::string& what) : std::runtime_error(what) {}
};

struct HypothesisViolated : std::runtime_error {
    HypothesisViolated(const std::string& what, Vec k) : std::runtime_error(what), offending_k(std::move(k)) {}
    Vec offending_k;
};

struct SolveDiverged : std::runtime_error {
    explicit SolveDiverged(const std::string& what) : std::runtime_error(what) {}
};

struct TwistViolated : std::runtime_error {
    explicit TwistViolated(const std::string& what) : std::runtime_error(what) {}
};

struct NotConverged : std::runtime_error {
    explicit NotConverged(const std::string& what) : std::runtime_error(what) {}
};

struct NotCritical : std::runtime_error {
    explicit NotCritical(const std::string& what) : std::runtime_error(what) {}
};

struct OrbitMismatch : std::runtime_error {
    explicit OrbitMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ConjugatePoint : std::runtime_error {
    explicit ConjugatePoint(const std::string& what) : std::runtime_error(what) {}
};

struct MonotonicityViolation : std::runtime_error {
    explicit MonotonicityViolation(const std::string& what) : std::runtime_error(what) {}
};

struct ReductionIllConditioned : std::runtime_error {
    explicit ReductionIllConditioned(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientSamples : std::runtime_error {
    explicit InsufficientSamples(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidConfig : std::runtime_error {
    explicit InvalidConfig(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace twistlab
