#include "qofilter/model.hpp"

#include <stdexcept>

namespace qof {

std::pair<StandardModel, Vector> standardize(const GeneralModel& gm, const Vector& y0) {
    const std::size_t m = gm.H.rows, n = gm.H.cols;
    if (m < n) throw std::invalid_argument("standardize: requires m >= n");
    if (gm.a.size() != m || y0.size() != m || gm.C.rows != m || gm.C.cols != m)
        throw std::invalid_argument("standardize: shape mismatch");
    const Matrix W = inv_sqrt_spd(gm.C);
    StandardModel sm{matmul(W, gm.H)};
    Vector r(m);
    for (std::size_t i = 0; i < m; ++i) r[i] = y0[i] - gm.a[i];
    return {std::move(sm), matvec(W, r)};
}

RefinedModel decompose(const StandardModel& sm, double rank_tol) {
    SvdResult f = svd(sm.A);
    const std::size_t n = sm.A.cols;
    if (f.delta.back() <= 0.0 || f.delta.back() < rank_tol * f.delta.front())
        throw std::runtime_error("decompose: rank-deficient model");
    RefinedModel rm;
    rm.U = std::move(f.U);
    rm.delta = std::move(f.delta);
    rm.V = std::move(f.V);
    rm.lambda.resize(n);
    for (std::size_t k = 0; k < n; ++k) rm.lambda[k] = rm.delta[k] * rm.delta[k];
    return rm;
}

RefinedImage refine_image(const RefinedModel& rm, const Vector& z0) {
    if (z0.size() != rm.U.rows) throw std::invalid_argument("refine_image: shape mismatch");
    const std::size_t n = rm.U.cols;
    Vector phi(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < rm.U.rows; ++i) s += rm.U(i, k) * z0[i];
        phi[k] = s;
    }
    return {std::move(phi)};
}

Vector principal_components(const RefinedModel& rm, const Vector& x) {
    if (x.size() != rm.V.rows) throw std::invalid_argument("principal_components: shape mismatch");
    const std::size_t n = rm.V.cols;
    Vector p(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += rm.V(i, k) * x[i];
        p[k] = s;
    }
    return p;
}

Vector synthesize(const RefinedModel& rm, const Vector& p) {
    if (p.size() != rm.V.cols) throw std::invalid_argument("synthesize: shape mismatch");
    return matvec(rm.V, p);
}

}  // namespace qof
