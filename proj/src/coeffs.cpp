#include "mvh/coeffs.hpp"

#include <cmath>
#include <ostream>

namespace mvh {

namespace {

struct GridRef {
    double step;
    int last;
    int left(double t, double& w) const {
        if (t <= 0.0) {
            w = 0.0;
            return 0;
        }
        const double x = t / step;
        int k = static_cast<int>(x);
        if (k >= last) {
            w = 1.0;
            return last - 1;
        }
        w = x - k;
        return k;
    }
};

void check_chain(const Mat& quad, double t, const char* chain) {
    if (!quad.allFinite() || quad.cwiseAbs().maxCoeff() > kBlowUpThreshold)
        throw BlowUpError(t, chain);
}

void check_chain(const Vec& v, double t, const char* chain) {
    if (!v.allFinite() || v.cwiseAbs().maxCoeff() > kBlowUpThreshold)
        throw BlowUpError(t, chain);
}

}  // namespace

void CoefficientTable::quad_at(const std::vector<QuadForm>& src, double t, QuadForm& out) const {
    double w;
    const int k = GridRef{step, node_count() - 1}.left(t, w);
    out.quad = (1.0 - w) * src[k].quad + w * src[k + 1].quad;
    out.lin = (1.0 - w) * src[k].lin + w * src[k + 1].lin;
    out.cst = (1.0 - w) * src[k].cst + w * src[k + 1].cst;
}

void CoefficientTable::mat_at(const std::vector<Mat>& src, double t, Mat& out) const {
    double w;
    const int k = GridRef{step, node_count() - 1}.left(t, w);
    out = (1.0 - w) * src[k] + w * src[k + 1];
}

void CoefficientTable::vec_at(const std::vector<Vec>& src, double t, Vec& out) const {
    double w;
    const int k = GridRef{step, node_count() - 1}.left(t, w);
    out = (1.0 - w) * src[k] + w * src[k + 1];
}

double CoefficientTable::scalar_at(const std::vector<double>& src, double t) const {
    double w;
    const int k = GridRef{step, node_count() - 1}.left(t, w);
    return (1.0 - w) * src[k] + w * src[k + 1];
}

void init_table(CoefficientTable& table, const ModelSpec& spec, const SigmaSchedule& schedule) {
    const int K = schedule.node_count();
    table.T = schedule.horizon();
    table.step = schedule.step();
    table.d = spec.d;
    table.m = spec.m;
    table.times.resize(K);
    table.sigma.resize(K);
    table.gram_gap.resize(K);
    for (int k = 0; k < K; ++k) {
        table.times[k] = schedule.time_at(k);
        table.sigma[k] = schedule.node(k);
        const Mat sd = table.sigma[k].topRows(spec.d);
        const Mat sm = table.sigma[k].bottomRows(spec.m);
        table.gram_gap[k] = sd.transpose() * sd - sm.transpose() * sm;
    }
}

void solve_log_v2_chain(CoefficientTable& table, const ModelSpec& spec) {
    const int n = spec.n();
    const int K = table.node_count();
    const double h = table.step;
    const Mat one_d = spec.ones_d();
    const Mat& F = spec.F;
    const Vec& mu = spec.mu;

    table.log_v2.assign(K, QuadForm(n));

    auto sigma_at = [&](double t, Mat& s) { table.mat_at(table.sigma, t, s); };
    auto gap_at = [&](double t, Mat& x) { table.mat_at(table.gram_gap, t, x); };

    // quadratic coefficient
    Mat s(n, n), xi(n, n);
    auto rhs_quad = [&](double t, const Mat& a) -> Mat {
        sigma_at(t, s);
        gap_at(t, xi);
        return 2.0 * one_d + a * xi * a + F.transpose() * a + a * F +
               2.0 * (one_d * s * a + a * s * one_d);
    };
    for (int k = K - 1; k > 0; --k) {
        const double t = table.times[k];
        const Mat& a = table.log_v2[k].quad;
        Mat k1 = rhs_quad(t, a);
        Mat k2 = rhs_quad(t - 0.5 * h, a - 0.5 * h * k1);
        Mat k3 = rhs_quad(t - 0.5 * h, a - 0.5 * h * k2);
        Mat k4 = rhs_quad(t - h, a - h * k3);
        table.log_v2[k - 1].quad = symmetrized(a - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        check_chain(table.log_v2[k - 1].quad, t - h, "log-V2 quadratic coefficient");
    }

    // linear coefficient (reads only the quadratic one)
    auto quad_interp = [&](double t, Mat& a) {
        double w;
        const int k = GridRef{h, K - 1}.left(t, w);
        a = (1.0 - w) * table.log_v2[k].quad + w * table.log_v2[k + 1].quad;
    };
    Mat aq(n, n);
    auto rhs_lin = [&](double t, const Vec& v) -> Vec {
        sigma_at(t, s);
        gap_at(t, xi);
        quad_interp(t, aq);
        return -aq * mu + (F.transpose() + aq * xi + 2.0 * one_d * s) * v;
    };
    for (int k = K - 1; k > 0; --k) {
        const double t = table.times[k];
        const Vec& v = table.log_v2[k].lin;
        Vec k1 = rhs_lin(t, v);
        Vec k2 = rhs_lin(t - 0.5 * h, v - 0.5 * h * k1);
        Vec k3 = rhs_lin(t - 0.5 * h, v - 0.5 * h * k2);
        Vec k4 = rhs_lin(t - h, v - h * k3);
        table.log_v2[k - 1].lin = v - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_chain(table.log_v2[k - 1].lin, t - h, "log-V2 linear coefficient");
    }

    // constant (reads quadratic and linear)
    auto lin_interp = [&](double t, Vec& v) {
        double w;
        const int k = GridRef{h, K - 1}.left(t, w);
        v = (1.0 - w) * table.log_v2[k].lin + w * table.log_v2[k + 1].lin;
    };
    Vec al(n);
    auto rhs_cst = [&](double t) -> double {
        sigma_at(t, s);
        gap_at(t, xi);
        quad_interp(t, aq);
        lin_interp(t, al);
        return -mu.dot(al) - 0.5 * (aq * s * s).trace() + 0.5 * al.dot(xi * al);
    };
    for (int k = K - 1; k > 0; --k) {
        const double t = table.times[k];
        const double k1 = rhs_cst(t);
        const double k2 = rhs_cst(t - 0.5 * h);
        const double k4 = rhs_cst(t - h);
        table.log_v2[k - 1].cst = table.log_v2[k].cst - (h / 6.0) * (k1 + 4.0 * k2 + k4);
    }
}

void solve_bond_chain(CoefficientTable& table, const ModelSpec& spec) {
    const int n = spec.n();
    const int K = table.node_count();
    const double h = table.step;
    const Mat one_d = spec.ones_d();
    const Mat& F = spec.F;
    const Vec& mu = spec.mu;

    table.log_bond.assign(K, QuadForm(n));
    table.bond_src_quad.resize(K);
    table.bond_src_lin.resize(K);
    table.za_drift.resize(K);
    table.za_load.resize(K);

    for (int k = 0; k < K; ++k) {
        const Mat& s = table.sigma[k];
        const Mat& a2 = table.log_v2[k].quad;
        const Vec& a1 = table.log_v2[k].lin;
        const Mat sdd = s * one_d * s;  // Sigma_d' Sigma_d
        table.bond_src_quad[k] = 2.0 * one_d + one_d * s * a2 + a2 * s * one_d;
        table.bond_src_lin[k] = one_d * s * a1;
        table.za_drift[k] = mu - sdd * a1;
        table.za_load[k] = -(F + sdd * a2 + s * one_d);
    }

    GridRef grid{h, K - 1};
    auto interp_mat = [&](const std::vector<Mat>& src, double t, Mat& out) {
        double w;
        const int k = grid.left(t, w);
        out = (1.0 - w) * src[k] + w * src[k + 1];
    };
    auto interp_vec = [&](const std::vector<Vec>& src, double t, Vec& out) {
        double w;
        const int k = grid.left(t, w);
        out = (1.0 - w) * src[k] + w * src[k + 1];
    };

    Mat s(n, n), b2(n, n), kap(n, n), cq(n, n);
    Vec b1(n), vphi(n), cl(n);

    auto rhs_quad = [&](double t, const Mat& c) -> Mat {
        interp_mat(table.sigma, t, s);
        interp_mat(table.bond_src_quad, t, b2);
        interp_mat(table.za_load, t, kap);
        const Mat s2 = s * s;
        return b2 - c * kap - kap.transpose() * c - c * s2 * c;
    };
    for (int k = K - 1; k > 0; --k) {
        const double t = table.times[k];
        const Mat& c = table.log_bond[k].quad;
        Mat k1 = rhs_quad(t, c);
        Mat k2 = rhs_quad(t - 0.5 * h, c - 0.5 * h * k1);
        Mat k3 = rhs_quad(t - 0.5 * h, c - 0.5 * h * k2);
        Mat k4 = rhs_quad(t - h, c - h * k3);
        table.log_bond[k - 1].quad = symmetrized(c - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        check_chain(table.log_bond[k - 1].quad, t - h, "bond quadratic coefficient");
    }

    auto quad_interp = [&](double t, Mat& c) {
        double w;
        const int k = grid.left(t, w);
        c = (1.0 - w) * table.log_bond[k].quad + w * table.log_bond[k + 1].quad;
    };
    auto rhs_lin = [&](double t, const Vec& v) -> Vec {
        interp_mat(table.sigma, t, s);
        interp_vec(table.bond_src_lin, t, b1);
        interp_vec(table.za_drift, t, vphi);
        interp_mat(table.za_load, t, kap);
        quad_interp(t, cq);
        const Mat s2 = s * s;
        return b1 - kap.transpose() * v - cq * vphi - cq * s2 * v;
    };
    for (int k = K - 1; k > 0; --k) {
        const double t = table.times[k];
        const Vec& v = table.log_bond[k].lin;
        Vec k1 = rhs_lin(t, v);
        Vec k2 = rhs_lin(t - 0.5 * h, v - 0.5 * h * k1);
        Vec k3 = rhs_lin(t - 0.5 * h, v - 0.5 * h * k2);
        Vec k4 = rhs_lin(t - h, v - h * k3);
        table.log_bond[k - 1].lin = v - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_chain(table.log_bond[k - 1].lin, t - h, "bond linear coefficient");
    }

    auto lin_interp = [&](double t, Vec& v) {
        double w;
        const int k = grid.left(t, w);
        v = (1.0 - w) * table.log_bond[k].lin + w * table.log_bond[k + 1].lin;
    };
    auto rhs_cst = [&](double t) -> double {
        interp_mat(table.sigma, t, s);
        interp_vec(table.za_drift, t, vphi);
        quad_interp(t, cq);
        lin_interp(t, cl);
        const Mat s2 = s * s;
        return -vphi.dot(cl) - 0.5 * (cq * s2).trace() - 0.5 * cl.dot(s2 * cl);
    };
    for (int k = K - 1; k > 0; --k) {
        const double t = table.times[k];
        const double k1 = rhs_cst(t);
        const double k2 = rhs_cst(t - 0.5 * h);
        const double k4 = rhs_cst(t - h);
        table.log_bond[k - 1].cst = table.log_bond[k].cst - (h / 6.0) * (k1 + 4.0 * k2 + k4);
    }
}

void build_forward_coeffs(CoefficientTable& table, const ModelSpec& spec) {
    const int K = table.node_count();
    const Mat one_d = spec.ones_d();
    const Mat one_m = spec.ones_m();
    const Mat& F = spec.F;
    const Vec& mu = spec.mu;

    table.x_drift.resize(K);
    table.x_load.resize(K);
    table.x_load_small.resize(K);
    table.z_drift.resize(K);
    table.z_load.resize(K);
    table.rn_drift.resize(K);
    table.rn_load.resize(K);

    for (int k = 0; k < K; ++k) {
        const Mat& s = table.sigma[k];
        const Mat& a2 = table.log_v2[k].quad;
        const Vec& a1 = table.log_v2[k].lin;
        const Mat& c2 = table.log_bond[k].quad;
        const Vec& c1 = table.log_bond[k].lin;
        const Mat sdd = s * one_d * s;
        const Mat s2 = s * s;

        table.x_drift[k] = s * c1 - one_d * s * a1;
        table.x_load_small[k] = s * c2 - one_d * s * a2;
        table.x_load[k] = one_m + table.x_load_small[k];
        table.z_drift[k] = mu - sdd * a1 + s2 * c1;
        table.z_load[k] = F + sdd * a2 + s * one_d - s2 * c2;
        table.rn_drift[k] = s * c1 - one_d * s * a1;
        table.rn_load[k] = table.x_load_small[k] - one_d;
    }
}

void solve_index_chain(CoefficientTable& table, const ModelSpec& spec) {
    if (spec.volatility.kind() != VolatilityMap::Kind::CevIndex) return;
    const int n = spec.n();
    const int K = table.node_count();
    const double h = table.step;
    const Vec sigma_y = spec.volatility.cev_loading();

    table.has_index_chain = true;
    table.index_loading = sigma_y;
    table.growth_lin.assign(K, Vec::Zero(n));
    table.growth_cst.assign(K, 0.0);
    table.growth_cst_drift.assign(K, 0.0);

    GridRef grid{h, K - 1};
    auto interp_mat = [&](const std::vector<Mat>& src, double t, Mat& out) {
        double w;
        const int k = grid.left(t, w);
        out = (1.0 - w) * src[k] + w * src[k + 1];
    };
    auto interp_vec = [&](const std::vector<Vec>& src, double t, Vec& out) {
        double w;
        const int k = grid.left(t, w);
        out = (1.0 - w) * src[k] + w * src[k + 1];
    };

    Mat ld(n, n), s(n, n);
    Vec dr(n), bl(n);
    auto rhs_lin = [&](double t, const Vec& v) -> Vec {
        interp_mat(table.z_load, t, ld);
        interp_mat(table.x_load, t, s);  // Psi
        return ld.transpose() * v - s.transpose() * sigma_y;
    };
    for (int k = K - 1; k > 0; --k) {
        const double t = table.times[k];
        const Vec& v = table.growth_lin[k];
        Vec k1 = rhs_lin(t, v);
        Vec k2 = rhs_lin(t - 0.5 * h, v - 0.5 * h * k1);
        Vec k3 = rhs_lin(t - 0.5 * h, v - 0.5 * h * k2);
        Vec k4 = rhs_lin(t - h, v - h * k3);
        table.growth_lin[k - 1] = v - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_chain(table.growth_lin[k - 1], t - h, "index growth linear coefficient");
    }

    Vec gl(n);
    auto lin_interp = [&](double t, Vec& v) {
        double w;
        const int k = grid.left(t, w);
        v = (1.0 - w) * table.growth_lin[k] + w * table.growth_lin[k + 1];
    };
    // with_cross: include the Ito covariance between the index noise and the
    // filtered-state noise (required for P = E[Y_T]/Y_t); without it the
    // constant solves the drift-moment variant.
    auto rhs_cst = [&](double t, bool with_cross) -> double {
        interp_vec(table.z_drift, t, dr);  // phi
        interp_vec(table.x_drift, t, bl);  // psi
        lin_interp(t, gl);
        interp_mat(table.sigma, t, s);
        double r = -dr.dot(gl) - 0.5 * gl.dot(s * s * gl) - bl.dot(sigma_y);
        if (with_cross) r -= sigma_y.dot(s * gl);
        return r;
    };
    for (int k = K - 1; k > 0; --k) {
        const double t = table.times[k];
        for (int variant = 0; variant < 2; ++variant) {
            const bool wc = variant == 0;
            const double k1 = rhs_cst(t, wc);
            const double k2 = rhs_cst(t - 0.5 * h, wc);
            const double k4 = rhs_cst(t - h, wc);
            auto& dst = wc ? table.growth_cst : table.growth_cst_drift;
            dst[k - 1] = dst[k] - (h / 6.0) * (k1 + 4.0 * k2 + k4);
        }
    }
}

CoefficientTable solve_coefficients(const ModelSpec& spec, const SigmaSchedule& schedule) {
    CoefficientTable table;
    init_table(table, spec, schedule);
    solve_log_v2_chain(table, spec);
    solve_bond_chain(table, spec);
    build_forward_coeffs(table, spec);
    solve_index_chain(table, spec);
    return table;
}

CoefficientTable solve_coefficients(const ModelSpec& spec, double ode_step) {
    const double step = ode_step > 0.0 ? ode_step : spec.horizon / 5000.0;
    return solve_coefficients(spec, build_sigma_schedule(spec, step));
}

double eval_log_v2(const CoefficientTable& table, double t, const Vec& zhat) {
    QuadForm q;
    table.quad_at(table.log_v2, t, q);
    return q.eval(zhat);
}

double eval_v2(const CoefficientTable& table, double t, const Vec& zhat) {
    return std::exp(eval_log_v2(table, t, zhat));
}

double eval_bond(const CoefficientTable& table, double t, const Vec& zhat) {
    QuadForm q;
    table.quad_at(table.log_bond, t, q);
    return std::exp(q.eval(zhat));
}

double eval_index_factor(const CoefficientTable& table, double t, const Vec& zhat) {
    if (!table.has_index_chain) throw ConfigMismatchError("index growth chain not solved");
    Vec lin;
    table.vec_at(table.growth_lin, t, lin);
    return std::exp(lin.dot(zhat) + table.scalar_at(table.growth_cst, t));
}

double eval_index_drift_moment(const CoefficientTable& table, double t, const Vec& zhat) {
    if (!table.has_index_chain) throw ConfigMismatchError("index growth chain not solved");
    Vec lin;
    table.vec_at(table.growth_lin, t, lin);
    return std::exp(lin.dot(zhat) + table.scalar_at(table.growth_cst_drift, t));
}

void require_solvable(const ModelSpec& spec) {
    if (spec.volatility.kind() != VolatilityMap::Kind::CevIndex)
        throw ConfigMismatchError("solvable route needs a CEV-index volatility");
    if (spec.volatility.cev_beta() != 1.0)
        throw ConfigMismatchError("solvable route needs unit-power index volatility");
    if (spec.payoff.kind() != PayoffMap::Kind::IndexLinear ||
        spec.payoff.index() != spec.volatility.cev_index_coord())
        throw ConfigMismatchError("solvable route needs an index-linear payoff on the index");
}

Vec eval_index_hedge(const CoefficientTable& table, const ModelSpec& spec, double t, double y,
                     const Vec& zhat) {
    require_solvable(spec);
    Vec zeta;
    eval_index_hedge_v1(table, t, y, zhat, zeta);
    return zeta;
}

double eval_index_hedge_v1(const CoefficientTable& table, double t, double y, const Vec& zhat,
                           Vec& zeta1) {
    QuadForm bond;
    table.quad_at(table.log_bond, t, bond);
    Vec growth_lin;
    table.vec_at(table.growth_lin, t, growth_lin);
    Mat s;
    table.mat_at(table.sigma, t, s);
    const double v1 = y * std::exp(bond.eval(zhat) + growth_lin.dot(zhat) +
                                   table.scalar_at(table.growth_cst, t));
    zeta1 = v1 * (table.index_loading + s * (bond.lin + growth_lin + bond.quad * zhat));
    return v1;
}

void CoefficientTable::dump_csv(std::ostream& os) const {
    const int n_ = n();
    os << "time";
    auto mat_cols = [&](const char* name) {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) os << "," << name << "_" << (i + 1) << (j + 1);
    };
    auto vec_cols = [&](const char* name) {
        for (int i = 0; i < n_; ++i) os << "," << name << "_" << (i + 1);
    };
    mat_cols("sigma");
    mat_cols("gram_gap");
    mat_cols("v2_quad");
    vec_cols("v2_lin");
    os << ",v2_cst";
    mat_cols("bond_quad");
    vec_cols("bond_lin");
    os << ",bond_cst";
    vec_cols("x_drift");
    mat_cols("x_load");
    vec_cols("z_drift");
    mat_cols("z_load");
    vec_cols("rn_drift");
    mat_cols("rn_load");
    if (has_index_chain) {
        vec_cols("growth_lin");
        os << ",growth_cst,growth_cst_drift";
    }
    os << "\n";
    auto put_mat = [&](const Mat& m) {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) os << "," << m(i, j);
    };
    auto put_vec = [&](const Vec& v) {
        for (int i = 0; i < n_; ++i) os << "," << v(i);
    };
    for (int k = 0; k < node_count(); ++k) {
        os << times[k];
        put_mat(sigma[k]);
        put_mat(gram_gap[k]);
        put_mat(log_v2[k].quad);
        put_vec(log_v2[k].lin);
        os << "," << log_v2[k].cst;
        put_mat(log_bond[k].quad);
        put_vec(log_bond[k].lin);
        os << "," << log_bond[k].cst;
        put_vec(x_drift[k]);
        put_mat(x_load[k]);
        put_vec(z_drift[k]);
        put_mat(z_load[k]);
        put_vec(rn_drift[k]);
        put_mat(rn_load[k]);
        if (has_index_chain) {
            put_vec(growth_lin[k]);
            os << "," << growth_cst[k] << "," << growth_cst_drift[k];
        }
        os << "\n";
    }
}

}  // namespace mvh
