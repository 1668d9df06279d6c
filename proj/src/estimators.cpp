#include "qofilter/estimators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qofilter/stats.hpp"

namespace qof {

LseEstimate lse(const RefinedModel& rm, const RefinedImage& img) {
    const std::size_t n = rm.delta.size();
    if (img.phi.size() != n) throw std::invalid_argument("lse: shape mismatch");
    LseEstimate est;
    est.p_star.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (rm.delta[k] <= 0.0) throw std::runtime_error("lse: zero singular value");
        est.p_star[k] = img.phi[k] / rm.delta[k];
    }
    est.x_star = synthesize(rm, est.p_star);
    return est;
}

double misfit(const RefinedModel& rm, const RefinedImage& img, const Vector& p) {
    const std::size_t n = rm.delta.size();
    if (img.phi.size() != n || p.size() != n) throw std::invalid_argument("misfit: shape mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = img.phi[k] - rm.delta[k] * p[k];
        s += r * r;
    }
    return s;
}

bool feasible(double theta, const FeasibilitySpec& spec) {
    if (theta < 0.0) throw std::invalid_argument("feasible: theta must be >= 0");
    if (!(spec.alpha1 >= 0.0 && spec.alpha1 <= spec.alpha2 && spec.alpha2 <= 1.0) || spec.n < 1)
        throw std::invalid_argument("feasible: invalid spec");
    // band [t_alpha2, t_{1-alpha1}]: alpha2 is the lower-tail mass, alpha1
    // the upper-tail mass, so alpha1 = alpha2 = 0.05 gives the usual 90% band
    const double lo = (spec.alpha2 <= 0.0) ? 0.0 : chi2_quantile(spec.alpha2, spec.n);
    const double hi = (spec.alpha1 <= 0.0)
                          ? std::numeric_limits<double>::infinity()
                          : chi2_quantile(1.0 - spec.alpha1, spec.n);
    return theta >= lo && theta <= hi;
}

std::pair<Vector, Vector> apply_filter(const RefinedModel& rm, const FilterWeights& w,
                                       const LseEstimate& est) {
    const std::size_t n = est.p_star.size();
    if (w.w.size() != n) throw std::invalid_argument("apply_filter: shape mismatch");
    Vector p_w(n);
    for (std::size_t k = 0; k < n; ++k) p_w[k] = w.w[k] * est.p_star[k];
    Vector x_w = synthesize(rm, p_w);
    return {std::move(p_w), std::move(x_w)};
}

double filter_error_sq(const Vector& lambda, const FilterWeights& w, const Vector& p0) {
    const std::size_t n = lambda.size();
    if (w.w.size() != n || p0.size() != n)
        throw std::invalid_argument("filter_error_sq: shape mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double omw = 1.0 - w.w[k];
        s += w.w[k] * w.w[k] / lambda[k] + omw * omw * p0[k] * p0[k];
    }
    return s;
}

FilterWeights wiener_weights(const Vector& lambda, const Vector& p) {
    const std::size_t n = lambda.size();
    if (p.size() != n) throw std::invalid_argument("wiener_weights: shape mismatch");
    FilterWeights fw;
    fw.w.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = lambda[k] * p[k] * p[k];
        fw.w[k] = std::isfinite(x) ? x / (1.0 + x) : 1.0;
    }
    return fw;
}

double weights_fr_residual(const RefinedImage& img, const FilterWeights& w) {
    const std::size_t n = img.phi.size();
    if (w.w.size() != n) throw std::invalid_argument("weights_fr_residual: shape mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = (w.w[k] - 1.0) * img.phi[k];
        s += d * d;
    }
    return s;
}

Matrix fisher_matrix(const RefinedModel& rm) {
    const std::size_t n = rm.V.rows;
    Matrix I(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += rm.V(i, k) * rm.lambda[k] * rm.V(j, k);
            I(i, j) = s;
        }
    return I;
}

double implied_alpha(double residual, int n) {
    return 1.0 - chi2_cdf(residual, n);
}

namespace oracle {

std::pair<Vector, double> optimal_estimate(const RefinedModel& rm, const RefinedImage& img,
                                           const Vector& p0) {
    const FilterWeights w = wiener_weights(rm.lambda, p0);
    const LseEstimate est = lse(rm, img);
    auto [p_w, x_w] = apply_filter(rm, w, est);
    (void)p_w;
    return {std::move(x_w), filter_error_sq(rm.lambda, w, p0)};
}

}  // namespace oracle

}  // namespace qof
