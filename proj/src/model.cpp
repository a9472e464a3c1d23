#include "mvh/model.hpp"

#include <cmath>

namespace mvh {

namespace {

bool is_integer(double x) { return x == std::floor(x); }

}  // namespace

VolatilityMap VolatilityMap::constant(const Mat& gamma) {
    VolatilityMap v;
    v.kind_ = Kind::Constant;
    for (Eigen::Index i = 0; i < gamma.rows(); ++i)
        v.rows_.push_back({gamma.row(i).transpose(), 0.0, 0});
    return v;
}

VolatilityMap VolatilityMap::log_linear(const Mat& loadings) {
    VolatilityMap v;
    v.kind_ = Kind::LogLinear;
    for (Eigen::Index i = 0; i < loadings.rows(); ++i)
        v.rows_.push_back({loadings.row(i).transpose(), 1.0, static_cast<int>(i)});
    return v;
}

VolatilityMap VolatilityMap::cev_index(int d, const Mat& sigma_block, int index, double beta,
                                       const Vec& sigma_y) {
    const int n = static_cast<int>(sigma_y.size());
    VolatilityMap v;
    v.kind_ = Kind::CevIndex;
    v.cev_index_ = index;
    for (int i = 0; i < n; ++i) {
        Row r;
        r.loading = Vec::Zero(n);
        if (i < d) {
            r.loading.head(d) = sigma_block.row(i).transpose();
        } else if (i == index) {
            r.loading = sigma_y;
            r.expo = beta;
            r.state = index;
        }
        v.rows_.push_back(std::move(r));
    }
    return v;
}

VolatilityMap VolatilityMap::composite(std::vector<Row> rows, Kind kind) {
    VolatilityMap v;
    v.kind_ = kind;
    v.rows_ = std::move(rows);
    return v;
}

double VolatilityMap::cev_beta() const {
    if (kind_ != Kind::CevIndex) throw ConfigMismatchError("volatility map is not CEV-index");
    return rows_[cev_index_coord()].expo;
}

int VolatilityMap::cev_index_coord() const {
    if (kind_ != Kind::CevIndex) throw ConfigMismatchError("volatility map is not CEV-index");
    return cev_index_;
}

const Vec& VolatilityMap::cev_loading() const {
    return rows_[cev_index_coord()].loading;
}

double VolatilityMap::scale(const Vec& x, const Row& r) const {
    if (r.expo == 0.0) return 1.0;
    double base = x[r.state];
    if (r.expo == 1.0) return base;
    if (!is_integer(r.expo) && base < power_floor_) base = power_floor_;
    return std::pow(base, r.expo);
}

double VolatilityMap::scale_d1(const Vec& x, const Row& r) const {
    if (r.expo == 0.0) return 0.0;
    if (r.expo == 1.0) return 1.0;
    double base = x[r.state];
    if (base < power_floor_) base = power_floor_;
    return r.expo * std::pow(base, r.expo - 1.0);
}

double VolatilityMap::scale_d2(const Vec& x, const Row& r) const {
    if (r.expo == 0.0 || r.expo == 1.0) return 0.0;
    double base = x[r.state];
    if (base < power_floor_) base = power_floor_;
    return r.expo * (r.expo - 1.0) * std::pow(base, r.expo - 2.0);
}

void VolatilityMap::eval(const Vec& x, Mat& gamma) const {
    const int n = dim();
    gamma.resize(n, n);
    for (int i = 0; i < n; ++i) gamma.row(i) = scale(x, rows_[i]) * rows_[i].loading.transpose();
}

Mat VolatilityMap::eval(const Vec& x) const {
    Mat g;
    eval(x, g);
    return g;
}

Mat VolatilityMap::derivative(const Vec& x, int i) const {
    const int n = dim();
    Mat dg = Mat::Zero(n, n);
    for (int r = 0; r < n; ++r)
        if (rows_[r].expo != 0.0 && rows_[r].state == i)
            dg.row(r) = scale_d1(x, rows_[r]) * rows_[r].loading.transpose();
    return dg;
}

Mat VolatilityMap::second_derivative(const Vec& x, int i, int j) const {
    const int n = dim();
    Mat dg = Mat::Zero(n, n);
    if (i != j) return dg;
    for (int r = 0; r < n; ++r)
        if (rows_[r].expo != 0.0 && rows_[r].state == i)
            dg.row(r) = scale_d2(x, rows_[r]) * rows_[r].loading.transpose();
    return dg;
}

void VolatilityMap::flow_increment(const Vec& x, const Vec& u, Mat& m) const {
    const int n = dim();
    m.setZero(n, n);
    for (int r = 0; r < n; ++r) {
        const Row& row = rows_[r];
        if (row.expo == 0.0) continue;
        m(row.state, r) += scale_d1(x, row) * row.loading.dot(u);
    }
}

void VolatilityMap::check_blocks(const Vec& x, int d) const {
    const int n = dim();
    Mat g = eval(x);
    if (d > 0) {
        Eigen::FullPivLU<Mat> lu(g.topLeftCorner(d, d));
        if (!lu.isInvertible())
            throw SingularBlockError("tradable volatility block singular at evaluated point");
    }
    const int m = n - d;
    if (m > 0) {
        Eigen::FullPivLU<Mat> lu(g.bottomRightCorner(m, m));
        if (!lu.isInvertible())
            throw SingularBlockError("state volatility block singular at evaluated point");
    }
}

PayoffMap PayoffMap::index_linear(int index) {
    PayoffMap p;
    p.kind_ = Kind::IndexLinear;
    p.index_ = index;
    return p;
}

PayoffMap PayoffMap::smooth(ValueFn v, GradFn g, HessFn h, ThirdFn t) {
    PayoffMap p;
    p.kind_ = Kind::Smooth;
    p.value_ = std::move(v);
    p.grad_ = std::move(g);
    p.hess_ = std::move(h);
    p.third_ = std::move(t);
    return p;
}

int PayoffMap::index() const {
    if (kind_ != Kind::IndexLinear) throw ConfigMismatchError("payoff is not index-linear");
    return index_;
}

double PayoffMap::value(const Vec& x) const {
    return kind_ == Kind::IndexLinear ? x[index_] : value_(x);
}

void PayoffMap::gradient(const Vec& x, Vec& out) const {
    out.setZero(x.size());
    if (kind_ == Kind::IndexLinear)
        out[index_] = 1.0;
    else
        grad_(x, out);
}

void PayoffMap::hessian(const Vec& x, Mat& out) const {
    out.setZero(x.size(), x.size());
    if (kind_ == Kind::Smooth) hess_(x, out);
}

double PayoffMap::third(const Vec& x, int i, int j, int k) const {
    return kind_ == Kind::IndexLinear ? 0.0 : third_(x, i, j, k);
}

Mat ModelSpec::ones_d() const {
    Vec diag = Vec::Zero(n());
    diag.head(d).setOnes();
    return diag.asDiagonal();
}

Mat ModelSpec::ones_m() const {
    Vec diag = Vec::Zero(n());
    diag.tail(m).setOnes();
    return diag.asDiagonal();
}

ValidationReport validate(const ModelSpec& spec) {
    ValidationReport rep;
    auto add = [&](const std::string& s) { rep.violations.push_back(s); };

    if (spec.d < 1) add("d >= 1 required");
    if (spec.m < 0) add("m >= 0 required");
    const int n = spec.n();
    if (spec.z0.size() != n) add("z0 must have dimension n = d + m");
    if (spec.horizon <= 0.0) add("horizon_T > 0 required");

    if (spec.Sigma0.rows() != n || spec.Sigma0.cols() != n) {
        add("Sigma0 must be n x n");
    } else {
        if ((spec.Sigma0 - spec.Sigma0.transpose()).cwiseAbs().maxCoeff() != 0.0)
            add("Sigma0 not symmetric");
        else if (smallest_eigenvalue(spec.Sigma0) <= 0.0)
            add("Sigma0 not positive definite");
    }
    if (spec.mu.size() != n) add("mu must have dimension n");
    if (spec.F.rows() != n || spec.F.cols() != n) add("F must be n x n");
    if (spec.delta.rows() != n) add("delta must have n rows");
    if (spec.x0.size() != n) add("x0 must have dimension n");

    if (spec.volatility.dim() != n) {
        add("volatility map dimension mismatch");
    } else {
        for (int i = 0; i < spec.d && i < n; ++i) {
            const auto& row = spec.volatility.rows()[i];
            if (spec.m > 0 && row.loading.size() == n &&
                row.loading.tail(spec.m).cwiseAbs().maxCoeff() != 0.0)
                add("tradable volatility row " + std::to_string(i + 1) +
                    " must have zero loading on the state noise");
        }
        if (spec.x0.size() == n) {
            try {
                spec.volatility.check_blocks(spec.x0, spec.d);
            } catch (const SingularBlockError& e) {
                add(e.what());
            }
        }
    }
    if (spec.payoff.kind() == PayoffMap::Kind::IndexLinear &&
        (spec.payoff.index() < 0 || spec.payoff.index() >= n))
        add("payoff index out of range");
    return rep;
}

GammaEval eval_gamma(const ModelSpec& spec, const Vec& x) {
    if (!x.allFinite()) throw std::invalid_argument("x must be finite");
    spec.volatility.check_blocks(x, spec.d);
    const int n = spec.n();
    GammaEval out;
    out.value = spec.volatility.eval(x);
    out.d1.reserve(n);
    for (int i = 0; i < n; ++i) out.d1.push_back(spec.volatility.derivative(x, i));
    out.d2.resize(n);
    for (int i = 0; i < n; ++i) {
        out.d2[i].reserve(n);
        for (int j = 0; j < n; ++j) out.d2[i].push_back(spec.volatility.second_derivative(x, i, j));
    }
    return out;
}

}  // namespace mvh
