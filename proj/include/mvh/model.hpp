#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mvh/types.hpp"

namespace mvh {

enum class FilterKind { Bayesian, KalmanBucy };

// Volatility map gamma(x) with block structure
//   rows 1..d   : (sigma(x), 0)      tradable assets
//   rows d+1..n : (sigmabar(x), rho(x))  non-tradable states
// Every row i is a constant loading scaled by a power of one coordinate:
//   gamma_i(x) = (x[state_i])^{expo_i} * loading_i'
// which covers constant, log-linear and CEV-index volatilities and gives
// analytic first and second derivatives.
class VolatilityMap {
public:
    enum class Kind { Constant, LogLinear, CevIndex, Composite };

    struct Row {
        Vec loading;     // constant row vector
        double expo = 0.0;
        int state = 0;   // coordinate entering the power (ignored when expo == 0)
    };

    static VolatilityMap constant(const Mat& gamma);
    static VolatilityMap log_linear(const Mat& loadings);
    // rows 1..d constant (sigma_block, 0); index row = x[index]^beta * sigma_y'
    static VolatilityMap cev_index(int d, const Mat& sigma_block, int index, double beta,
                                   const Vec& sigma_y);
    static VolatilityMap composite(std::vector<Row> rows, Kind kind = Kind::Composite);

    Kind kind() const { return kind_; }
    int dim() const { return static_cast<int>(rows_.size()); }
    const std::vector<Row>& rows() const { return rows_; }

    // CEV-index accessors (ConfigMismatch when the map is not of that kind).
    double cev_beta() const;
    int cev_index_coord() const;
    const Vec& cev_loading() const;

    // Floor applied to a coordinate before raising it to a non-integer power.
    double power_floor() const { return power_floor_; }
    void set_power_floor(double f) { power_floor_ = f; }

    void eval(const Vec& x, Mat& gamma) const;
    Mat eval(const Vec& x) const;

    // d gamma / d x_i as a dense matrix (rows mostly zero).
    Mat derivative(const Vec& x, int i) const;
    // d^2 gamma / d x_i d x_j.
    Mat second_derivative(const Vec& x, int i, int j) const;

    // Flow generator of one Euler step: M(k,j) = sum_l d(gamma_{j,l})/dx_k * u_l.
    void flow_increment(const Vec& x, const Vec& u, Mat& m) const;

    // Throws SingularBlockError when the sigma (top-left d x d) or rho
    // (bottom-right m x m) block is singular at x.
    void check_blocks(const Vec& x, int d) const;

private:
    Kind kind_ = Kind::Composite;
    std::vector<Row> rows_;
    int cev_index_ = -1;
    double power_floor_ = 1e-12;

    double scale(const Vec& x, const Row& r) const;
    double scale_d1(const Vec& x, const Row& r) const;
    double scale_d2(const Vec& x, const Row& r) const;
};

// Terminal liability H(X_T) with derivatives up to third order (the
// expansion needs them; IndexLinear has them structurally zero).
class PayoffMap {
public:
    enum class Kind { IndexLinear, Smooth };

    using ValueFn = std::function<double(const Vec&)>;
    using GradFn = std::function<void(const Vec&, Vec&)>;
    using HessFn = std::function<void(const Vec&, Mat&)>;
    using ThirdFn = std::function<double(const Vec&, int, int, int)>;

    static PayoffMap index_linear(int index);
    static PayoffMap smooth(ValueFn v, GradFn g, HessFn h, ThirdFn t);

    Kind kind() const { return kind_; }
    int index() const;

    double value(const Vec& x) const;
    void gradient(const Vec& x, Vec& out) const;
    void hessian(const Vec& x, Mat& out) const;
    double third(const Vec& x, int i, int j, int k) const;

private:
    Kind kind_ = Kind::IndexLinear;
    int index_ = 0;
    ValueFn value_;
    GradFn grad_;
    HessFn hess_;
    ThirdFn third_;
};

// Full market / filter parameterization.
struct ModelSpec {
    int d = 0;                 // tradable assets
    int m = 0;                 // non-tradable state coordinates
    Vec z0;                    // prior mean of the market price of risk
    Mat Sigma0;                // prior covariance (symmetric positive definite)
    Vec mu;                    // signal drift constant
    Mat F;                     // signal mean reversion
    Mat delta;                 // signal noise loading (n x p)
    FilterKind filter_kind = FilterKind::KalmanBucy;
    VolatilityMap volatility;
    PayoffMap payoff;
    Vec x0;                    // initial state (S_0, Y_0)
    double horizon = 0.0;      // T in years

    int n() const { return d + m; }

    // diag(1,..,1,0,..,0) with d ones, and its complement.
    Mat ones_d() const;
    Mat ones_m() const;

    ModelSpec() : volatility(VolatilityMap::constant(Mat::Identity(1, 1))),
                  payoff(PayoffMap::index_linear(0)) {}
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate(const ModelSpec& spec);

// gamma(x) together with first/second derivative tensors; checks block
// nonsingularity at x.
struct GammaEval {
    Mat value;
    std::vector<Mat> d1;               // d1[i] = d gamma / dx_i
    std::vector<std::vector<Mat>> d2;  // d2[i][j]
};
GammaEval eval_gamma(const ModelSpec& spec, const Vec& x);

}  // namespace mvh
