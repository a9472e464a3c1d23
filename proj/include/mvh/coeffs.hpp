#pragma once

#include <iosfwd>
#include <vector>

#include "mvh/filter.hpp"
#include "mvh/model.hpp"
#include "mvh/types.hpp"

namespace mvh {

// Every deterministic time-dependent coefficient of the hedging problem,
// tabulated on the same uniform grid as the covariance schedule.
//
// log_v2   : exponent of V2(t) = exp(1/2 z'Q z + l'z + c)       (backward Riccati)
// log_bond : exponent of A(t,T), the exponential-quadratic factor with
//            V1(t) = A(t,T) E[H | G_t] under the forward measure (same form)
// x_drift / x_load      : forward-measure X drift   gamma(x)[psi + Psi zhat]
// x_load_small          : Psi without its identity block (drives the expansion)
// z_drift / z_load      : forward-measure zhat drift  phi - Phi zhat
// rn_drift / rn_load    : Girsanov kernel G + K zhat between the forward
//                         measure and the physical one
// za_* / bond_src_*     : intermediate measure pieces feeding the bond chain
// growth_*              : index growth factor P(t,T) = exp(l'z + c) for the
//                         index-linear solvable configuration
struct CoefficientTable {
    double T = 0.0;
    double step = 0.0;
    int d = 0;
    int m = 0;
    std::vector<double> times;

    std::vector<Mat> sigma;
    std::vector<Mat> gram_gap;          // Sigma_d'Sigma_d - Sigma_m'Sigma_m

    std::vector<QuadForm> log_v2;
    std::vector<QuadForm> log_bond;

    std::vector<Mat> bond_src_quad;
    std::vector<Vec> bond_src_lin;
    std::vector<Vec> za_drift;
    std::vector<Mat> za_load;

    std::vector<Vec> x_drift;
    std::vector<Mat> x_load;
    std::vector<Mat> x_load_small;
    std::vector<Vec> z_drift;
    std::vector<Mat> z_load;
    std::vector<Vec> rn_drift;
    std::vector<Mat> rn_load;

    bool has_index_chain = false;
    Vec index_loading;
    std::vector<Vec> growth_lin;
    std::vector<double> growth_cst;        // expectation-consistent constant
    std::vector<double> growth_cst_drift;  // drift-moment variant (no Ito cross term)

    int node_count() const { return static_cast<int>(times.size()); }
    int n() const { return d + m; }

    // linear interpolation in t
    void quad_at(const std::vector<QuadForm>& src, double t, QuadForm& out) const;
    void mat_at(const std::vector<Mat>& src, double t, Mat& out) const;
    void vec_at(const std::vector<Vec>& src, double t, Vec& out) const;
    double scalar_at(const std::vector<double>& src, double t) const;

    void dump_csv(std::ostream& os) const;
};

// Solver stages (exposed separately so tests can exercise the sequential
// structure); solve_coefficients runs them all.
void init_table(CoefficientTable& table, const ModelSpec& spec, const SigmaSchedule& schedule);
void solve_log_v2_chain(CoefficientTable& table, const ModelSpec& spec);
void solve_bond_chain(CoefficientTable& table, const ModelSpec& spec);
void build_forward_coeffs(CoefficientTable& table, const ModelSpec& spec);
void solve_index_chain(CoefficientTable& table, const ModelSpec& spec);

CoefficientTable solve_coefficients(const ModelSpec& spec, const SigmaSchedule& schedule);

// Convenience: schedule + coefficients with the default grid (T/5000 unless
// overridden).
CoefficientTable solve_coefficients(const ModelSpec& spec, double ode_step = -1.0);

double eval_log_v2(const CoefficientTable& table, double t, const Vec& zhat);
double eval_v2(const CoefficientTable& table, double t, const Vec& zhat);
double eval_bond(const CoefficientTable& table, double t, const Vec& zhat);

// P(t,T): expectation-consistent growth factor, E[Y_T | G_t] = Y_t P(t,T).
double eval_index_factor(const CoefficientTable& table, double t, const Vec& zhat);
// Exponential moment of the integrated drift rate alone; differs from
// eval_index_factor by the covariance between the index noise and the
// filtered-state noise.
double eval_index_drift_moment(const CoefficientTable& table, double t, const Vec& zhat);

// Closed-form martingale loading (Z_1; Gamma_1) of V1 for the index-linear
// configuration with unit-power volatility:
//   zeta_1(t) = V1(t) { sigma_y + Sigma(t) [c1 + beta1 + c2 zhat] }.
Vec eval_index_hedge(const CoefficientTable& table, const ModelSpec& spec, double t, double y,
                     const Vec& zhat);
// Same, returning V1 as well (hot path for the wealth replay).
double eval_index_hedge_v1(const CoefficientTable& table, double t, double y, const Vec& zhat,
                           Vec& zeta1);

// Throws ConfigMismatchError unless payoff is index-linear on the CEV index
// coordinate with unit power.
void require_solvable(const ModelSpec& spec);

}  // namespace mvh
