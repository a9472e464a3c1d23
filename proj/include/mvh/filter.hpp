#pragma once

#include <iosfwd>
#include <vector>

#include "mvh/model.hpp"
#include "mvh/types.hpp"

namespace mvh {

// Conditional covariance of the Bayesian model: Sigma(t) = [Sigma0^{-1} + t I]^{-1}.
Mat bayesian_sigma(const Mat& Sigma0, double t);

// Closed-form posterior mean of the Bayesian model given the observation
// vector omega_t:  zhat_t = z0 + Sigma(t) [omega_t - t z0].
Vec bayesian_posterior_mean(const Mat& Sigma0, const Vec& z0, double t, const Vec& omega);

// Deterministic covariance Sigma(t) tabulated on a uniform grid over [0, T],
// with entrywise linear interpolation between nodes.
class SigmaSchedule {
public:
    SigmaSchedule() = default;
    SigmaSchedule(double T, std::vector<Mat> nodes);

    double horizon() const { return T_; }
    double step() const { return step_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const Mat& node(int k) const { return nodes_[k]; }
    double time_at(int k) const { return step_ * k; }

    Mat at(double t) const;
    void at_into(double t, Mat& out) const;

    // time, row-major entries
    void dump_csv(std::ostream& os) const;

private:
    double T_ = 0.0;
    double step_ = 0.0;
    std::vector<Mat> nodes_;
};

// RK4 integration of dSigma/dt = delta delta' - F Sigma - Sigma F' - Sigma^2
// from Sigma(0) = Sigma0; each node symmetrized, checked positive definite
// and against the blow-up threshold.
SigmaSchedule solve_kalman_sigma(const ModelSpec& spec, double step);

// Dispatch on filter kind: closed form per node for Bayesian, RK4 otherwise.
SigmaSchedule build_sigma_schedule(const ModelSpec& spec, double step);

struct FilterState {
    double t = 0.0;
    Vec zhat;
    Mat sigma;
};

// Euler-Maruyama update driven by an innovation increment dn over [t, t+dt]:
//   zhat <- zhat + (mu - F zhat) dt + Sigma(t) dn.
FilterState propagate_zhat(const FilterState& state, const SigmaSchedule& schedule,
                           const ModelSpec& spec, const Vec& dn, double dt);

}  // namespace mvh
