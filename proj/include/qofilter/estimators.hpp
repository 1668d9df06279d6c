#pragma once

#include <utility>

#include "qofilter/model.hpp"

namespace qof {

struct LseEstimate {
    Vector p_star;  // Delta^{-1} phi
    Vector x_star;  // V p_star
};

struct FilterWeights {
    Vector w;
};

struct FeasibilitySpec {
    double alpha1;
    double alpha2;
    int n;
};

LseEstimate lse(const RefinedModel& rm, const RefinedImage& img);

// Theta = ||phi - Delta p||^2
double misfit(const RefinedModel& rm, const RefinedImage& img, const Vector& p);

// t_{1-alpha2} <= theta <= t_{1-alpha1}, bounds inclusive
bool feasible(double theta, const FeasibilitySpec& spec);

// p_w = W p_star, x_w = V p_w
std::pair<Vector, Vector> apply_filter(const RefinedModel& rm, const FilterWeights& w,
                                       const LseEstimate& est);

// sum_k ( w_k^2/lambda_k + (1-w_k)^2 p0_k^2 )
double filter_error_sq(const Vector& lambda, const FilterWeights& w, const Vector& p0);

// w_k = lambda_k p_k^2 / (1 + lambda_k p_k^2)
FilterWeights wiener_weights(const Vector& lambda, const Vector& p);

// ||(W - I) phi||^2
double weights_fr_residual(const RefinedImage& img, const FilterWeights& w);

// I = V Lambda V^T
Matrix fisher_matrix(const RefinedModel& rm);

// significance level implied by a residual: root of residual = t_{1-alpha}
double implied_alpha(double residual, int n);

namespace oracle {

// Wiener filter evaluated at the true components p0; benchmarking only.
std::pair<Vector, double> optimal_estimate(const RefinedModel& rm, const RefinedImage& img,
                                           const Vector& p0);

}  // namespace oracle

}  // namespace qof
