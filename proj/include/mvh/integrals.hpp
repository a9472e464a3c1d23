#pragma once

#include <vector>

#include "mvh/coeffs.hpp"
#include "mvh/types.hpp"

namespace mvh {

// Nested time integrals of the tabulated coefficients as functions of the
// left endpoint t, on the coefficient grid:
//
//   single   [f]_t^T,   weighted [(s-t) f]_t^T,
//   dbl      [[f]_t^s]_t^T,   triple [[[f]_t^u]_t^s]_t^T,
//   wdbl     [[(u-t) f]_t^s]_t^T,
//   prod     [w [f]_t^s]_t^T,   prod2 [[w [f]_t^u]_t^s]_t^T.
//
// Built once per coefficient table by iterated trapezoid prefix sums; every
// lookup is an interpolation, no re-integration.
struct IntegralTable {
    double T = 0.0;
    double step = 0.0;
    std::vector<double> times;

    // integrand: forward-measure X drift constant (psi)
    std::vector<Vec> x_drift_1, x_drift_2, x_drift_w;
    // integrand: forward-measure zhat drift constant (phi)
    std::vector<Vec> z_drift_2, z_drift_3, z_drift_w2;
    // integrand: X drift loading without identity block (PsiTilde)
    std::vector<Mat> x_small_1, x_small_2, x_small_w;
    // integrand: zhat drift loading (Phi)
    std::vector<Mat> z_load_2, z_load_3, z_load_w2;
    // integrand: covariance Sigma
    std::vector<Mat> sigma_2;
    // products
    std::vector<Vec> x_small_z_drift;   // [PsiTilde [phi]_t^s]_t^T
    std::vector<Vec> z_load_z_drift2;   // [[Phi [phi]_t^u]_t^s]_t^T
    std::vector<Mat> x_small_z_load;    // [PsiTilde [Phi]_t^s]_t^T
    std::vector<Mat> z_load_z_load2;    // [[Phi [Phi]_t^u]_t^s]_t^T

    int node_count() const { return static_cast<int>(times.size()); }

    void vec_at(const std::vector<Vec>& src, double t, Vec& out) const;
    void mat_at(const std::vector<Mat>& src, double t, Mat& out) const;

    // Build-count instrumentation: how many times the prefix integration ran
    // for this table (tests assert evaluation never re-integrates).
    int build_count = 0;
};

IntegralTable build_integral_table(const CoefficientTable& coeffs);

}  // namespace mvh
