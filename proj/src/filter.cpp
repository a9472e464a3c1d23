#include "mvh/filter.hpp"

#include <cmath>
#include <ostream>

namespace mvh {

namespace {

void check_node(const Mat& sigma, double t) {
    if (!sigma.allFinite() || sigma.cwiseAbs().maxCoeff() > kBlowUpThreshold)
        throw BlowUpError(t, "covariance");
    const double lam = smallest_eigenvalue(sigma);
    if (lam < kPdTolerance) throw NotPositiveDefiniteError(t, lam);
}

}  // namespace

Mat bayesian_sigma(const Mat& Sigma0, double t) {
    const Eigen::Index n = Sigma0.rows();
    Eigen::FullPivLU<Mat> lu0(Sigma0);
    if (!lu0.isInvertible()) throw SingularMatrixError("Sigma0 singular");
    Mat inner = lu0.inverse() + t * Mat::Identity(n, n);
    Eigen::FullPivLU<Mat> lu(inner);
    if (!lu.isInvertible()) throw SingularMatrixError("Sigma0^{-1} + t I singular");
    return symmetrized(lu.inverse());
}

Vec bayesian_posterior_mean(const Mat& Sigma0, const Vec& z0, double t, const Vec& omega) {
    return z0 + bayesian_sigma(Sigma0, t) * (omega - t * z0);
}

SigmaSchedule::SigmaSchedule(double T, std::vector<Mat> nodes) : T_(T), nodes_(std::move(nodes)) {
    step_ = nodes_.size() > 1 ? T_ / static_cast<double>(nodes_.size() - 1) : T_;
}

Mat SigmaSchedule::at(double t) const {
    Mat out;
    at_into(t, out);
    return out;
}

void SigmaSchedule::at_into(double t, Mat& out) const {
    const int last = node_count() - 1;
    if (t <= 0.0) {
        out = nodes_.front();
        return;
    }
    if (t >= T_) {
        out = nodes_.back();
        return;
    }
    const double x = t / step_;
    int k = static_cast<int>(x);
    if (k >= last) k = last - 1;
    const double w = x - k;
    out = (1.0 - w) * nodes_[k] + w * nodes_[k + 1];
}

void SigmaSchedule::dump_csv(std::ostream& os) const {
    const Eigen::Index n = nodes_.empty() ? 0 : nodes_.front().rows();
    os << "time";
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) os << ",sigma_" << (i + 1) << (j + 1);
    os << "\n";
    for (int k = 0; k < node_count(); ++k) {
        os << time_at(k);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) os << "," << nodes_[k](i, j);
        os << "\n";
    }
}

SigmaSchedule solve_kalman_sigma(const ModelSpec& spec, double step) {
    if (step <= 0.0) throw std::invalid_argument("step must be positive");
    const double T = spec.horizon;
    const int K = std::max(1, static_cast<int>(std::ceil(T / step - 1e-9)));
    const double h = T / K;
    const Mat ddT = spec.delta * spec.delta.transpose();
    const Mat& F = spec.F;

    auto rhs = [&](const Mat& s) -> Mat {
        return ddT - F * s - s * F.transpose() - s * s;
    };

    std::vector<Mat> nodes;
    nodes.reserve(K + 1);
    nodes.push_back(symmetrized(spec.Sigma0));
    check_node(nodes.front(), 0.0);
    for (int k = 0; k < K; ++k) {
        const Mat& s = nodes.back();
        Mat k1 = rhs(s);
        Mat k2 = rhs(s + 0.5 * h * k1);
        Mat k3 = rhs(s + 0.5 * h * k2);
        Mat k4 = rhs(s + h * k3);
        Mat next = symmetrized(s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        check_node(next, (k + 1) * h);
        nodes.push_back(std::move(next));
    }
    return SigmaSchedule(T, std::move(nodes));
}

SigmaSchedule build_sigma_schedule(const ModelSpec& spec, double step) {
    if (spec.filter_kind == FilterKind::KalmanBucy) return solve_kalman_sigma(spec, step);
    if (step <= 0.0) throw std::invalid_argument("step must be positive");
    const double T = spec.horizon;
    const int K = std::max(1, static_cast<int>(std::ceil(T / step - 1e-9)));
    const double h = T / K;
    std::vector<Mat> nodes;
    nodes.reserve(K + 1);
    for (int k = 0; k <= K; ++k) {
        Mat s = bayesian_sigma(spec.Sigma0, k * h);
        check_node(s, k * h);
        nodes.push_back(std::move(s));
    }
    return SigmaSchedule(T, std::move(nodes));
}

FilterState propagate_zhat(const FilterState& state, const SigmaSchedule& schedule,
                           const ModelSpec& spec, const Vec& dn, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    FilterState next;
    next.t = state.t + dt;
    Mat sigma = schedule.at(state.t);
    next.zhat = state.zhat + (spec.mu - spec.F * state.zhat) * dt + sigma * dn;
    next.sigma = schedule.at(next.t);
    return next;
}

}  // namespace mvh
