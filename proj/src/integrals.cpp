#include "mvh/integrals.hpp"

namespace mvh {

namespace {

template <class T>
std::vector<T> cumtrapz(const std::vector<T>& f, double h) {
    std::vector<T> out(f.size());
    out[0] = T(0.0 * f[0]);
    for (size_t k = 1; k < f.size(); ++k) out[k] = out[k - 1] + 0.5 * h * (f[k] + f[k - 1]);
    return out;
}

template <class T>
std::vector<T> scale_by_time(const std::vector<T>& f, const std::vector<double>& t) {
    std::vector<T> out(f.size());
    for (size_t k = 0; k < f.size(); ++k) out[k] = t[k] * f[k];
    return out;
}

// All plain brackets of one integrand.
template <class T>
struct Brackets {
    std::vector<T> single, weighted, dbl, triple, wdbl;
    std::vector<T> prefix;  // F1, kept for the product brackets
};

template <class T>
Brackets<T> build_brackets(const std::vector<T>& f, const std::vector<double>& times, double h) {
    const size_t K = f.size();
    const double T_ = times.back();
    Brackets<T> b;
    auto F1 = cumtrapz(f, h);
    auto Fs = cumtrapz(scale_by_time(f, times), h);
    auto G1 = cumtrapz(F1, h);
    auto Gs = cumtrapz(Fs, h);
    auto H1 = cumtrapz(G1, h);
    b.single.resize(K);
    b.weighted.resize(K);
    b.dbl.resize(K);
    b.triple.resize(K);
    b.wdbl.resize(K);
    for (size_t k = 0; k < K; ++k) {
        const double t = times[k];
        const double Tt = T_ - t;
        b.single[k] = F1.back() - F1[k];
        b.weighted[k] = (Fs.back() - Fs[k]) - t * (F1.back() - F1[k]);
        b.dbl[k] = (G1.back() - G1[k]) - Tt * F1[k];
        b.triple[k] = (H1.back() - H1[k]) - Tt * G1[k] - 0.5 * Tt * Tt * F1[k];
        b.wdbl[k] = (Gs.back() - Gs[k]) - Tt * Fs[k] - t * ((G1.back() - G1[k]) - Tt * F1[k]);
    }
    b.prefix = std::move(F1);
    return b;
}

// [w [f]_t^s]_t^T with a matrix weight w and prefix F1f of the inner integrand.
template <class TF>
std::vector<TF> build_prod_single(const std::vector<Mat>& w, const std::vector<TF>& F1f,
                                  const std::vector<Mat>& Fw, const std::vector<double>& times,
                                  double h) {
    const size_t K = w.size();
    std::vector<TF> wf(K);
    for (size_t k = 0; k < K; ++k) wf[k] = w[k] * F1f[k];
    auto C = cumtrapz(wf, h);
    std::vector<TF> out(K);
    for (size_t k = 0; k < K; ++k)
        out[k] = (C.back() - C[k]) - (Fw.back() - Fw[k]) * F1f[k];
    return out;
}

// [[w [f]_t^u]_t^s]_t^T
template <class TF>
std::vector<TF> build_prod_double(const std::vector<Mat>& w, const std::vector<TF>& F1f,
                                  const std::vector<Mat>& Fw, const std::vector<double>& times,
                                  double h) {
    const size_t K = w.size();
    const double T_ = times.back();
    std::vector<TF> wf(K);
    for (size_t k = 0; k < K; ++k) wf[k] = w[k] * F1f[k];
    auto C = cumtrapz(wf, h);
    auto GC = cumtrapz(C, h);
    auto GF = cumtrapz(Fw, h);
    std::vector<TF> out(K);
    for (size_t k = 0; k < K; ++k) {
        const double Tt = T_ - times[k];
        out[k] = (GC.back() - GC[k]) - Tt * C[k] -
                 ((GF.back() - GF[k]) - Tt * Fw[k]) * F1f[k];
    }
    return out;
}

}  // namespace

void IntegralTable::vec_at(const std::vector<Vec>& src, double t, Vec& out) const {
    const int last = node_count() - 1;
    double x = t <= 0.0 ? 0.0 : t / step;
    int k = static_cast<int>(x);
    if (k >= last) {
        out = src[last];
        return;
    }
    const double w = x - k;
    out = (1.0 - w) * src[k] + w * src[k + 1];
}

void IntegralTable::mat_at(const std::vector<Mat>& src, double t, Mat& out) const {
    const int last = node_count() - 1;
    double x = t <= 0.0 ? 0.0 : t / step;
    int k = static_cast<int>(x);
    if (k >= last) {
        out = src[last];
        return;
    }
    const double w = x - k;
    out = (1.0 - w) * src[k] + w * src[k + 1];
}

IntegralTable build_integral_table(const CoefficientTable& coeffs) {
    IntegralTable table;
    table.T = coeffs.T;
    table.step = coeffs.step;
    table.times = coeffs.times;
    const double h = coeffs.step;
    const auto& times = coeffs.times;

    auto psi = build_brackets(coeffs.x_drift, times, h);
    table.x_drift_1 = std::move(psi.single);
    table.x_drift_2 = std::move(psi.dbl);
    table.x_drift_w = std::move(psi.weighted);

    auto phi = build_brackets(coeffs.z_drift, times, h);
    table.z_drift_2 = std::move(phi.dbl);
    table.z_drift_3 = std::move(phi.triple);
    table.z_drift_w2 = std::move(phi.wdbl);

    auto pt = build_brackets(coeffs.x_load_small, times, h);
    table.x_small_1 = std::move(pt.single);
    table.x_small_2 = std::move(pt.dbl);
    table.x_small_w = std::move(pt.weighted);

    auto zl = build_brackets(coeffs.z_load, times, h);
    table.z_load_2 = std::move(zl.dbl);
    table.z_load_3 = std::move(zl.triple);
    table.z_load_w2 = std::move(zl.wdbl);

    auto sg = build_brackets(coeffs.sigma, times, h);
    table.sigma_2 = std::move(sg.dbl);

    auto Fw = cumtrapz(coeffs.x_load_small, h);   // prefix of PsiTilde
    auto FPhi = cumtrapz(coeffs.z_load, h);       // prefix of Phi
    table.x_small_z_drift =
        build_prod_single(coeffs.x_load_small, phi.prefix, Fw, times, h);
    table.z_load_z_drift2 = build_prod_double(coeffs.z_load, phi.prefix, FPhi, times, h);
    table.x_small_z_load = build_prod_single(coeffs.x_load_small, zl.prefix, Fw, times, h);
    table.z_load_z_load2 = build_prod_double(coeffs.z_load, zl.prefix, FPhi, times, h);

    table.build_count = 1;
    return table;
}

}  // namespace mvh
