#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mvh {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Quadratic form in the filtered state:  1/2 z'Q z + l'z + c.
// Used for the exponents of V2, A(t,T) and P(t,T).
struct QuadForm {
    Mat quad;
    Vec lin;
    double cst = 0.0;

    QuadForm() = default;
    QuadForm(int n) : quad(Mat::Zero(n, n)), lin(Vec::Zero(n)) {}

    double eval(const Vec& z) const {
        return 0.5 * z.dot(quad * z) + lin.dot(z) + cst;
    }
};

// Exactly symmetric result: (i,j) and (j,i) are assigned from one rounding.
inline Mat symmetrized(const Mat& m) {
    Mat s(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        s(i, i) = m(i, i);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return s;
}

inline double smallest_eigenvalue(const Mat& sym) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

struct BlowUpError : std::runtime_error {
    double time;
    explicit BlowUpError(double t, const std::string& what_chain)
        : std::runtime_error(what_chain + " exceeded blow-up threshold at t=" + std::to_string(t)),
          time(t) {}
};

struct NotPositiveDefiniteError : std::runtime_error {
    double time;
    double min_eigenvalue;
    NotPositiveDefiniteError(double t, double lam)
        : std::runtime_error("covariance lost positive definiteness at t=" + std::to_string(t) +
                             " (min eigenvalue " + std::to_string(lam) + ")"),
          time(t), min_eigenvalue(lam) {}
};

struct SingularMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularBlockError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FlowsMissingError : std::runtime_error {
    FlowsMissingError() : std::runtime_error("ensemble was simulated without stochastic flows") {}
};

struct OrderError : std::runtime_error {
    explicit OrderError(int order)
        : std::runtime_error("expansion order " + std::to_string(order) + " unsupported (0..3)") {}
};

struct NumericOverflowError : std::runtime_error {
    double time;
    long path;
    NumericOverflowError(long p, double t)
        : std::runtime_error("state overflow on path " + std::to_string(p) +
                             " at t=" + std::to_string(t)),
          time(t), path(p) {}
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Blow-up threshold shared by the Riccati chains and the covariance solver.
inline constexpr double kBlowUpThreshold = 1e8;

// Tolerance on the smallest eigenvalue when checking positive definiteness.
inline constexpr double kPdTolerance = -1e-10;

}  // namespace mvh
