#pragma once

#include <cstdint>
#include <utility>

#include "qofilter/estimators.hpp"

namespace qof {

struct QoConfig {
    double alpha = 0.5;          // constraint target t = chi2_quantile(1-alpha, n)
    double mu_max = 1.0;         // initial multiplier bracket cap
    double constraint_rtol = 1e-6;
    double inner_tol = 1e-10;
    int max_outer_iters = 200;
    int grid_points = 160;       // inner 1-D scan resolution
};

struct QoSolution {
    Vector p_min;
    FilterWeights w_qo;
    Vector p_tilde;
    Vector x_tilde;
    double mu = 0.0;
    double constraint_residual = 0.0;  // |G(p_min) - t|
    double objective = 0.0;
    int outer_iters = 0;
    bool degenerate = false;
    double t = 0.0;
};

// G(p) = sum_k phi_k^2 / (1 + lambda_k p_k^2)^2
double constraint_value(const Vector& lambda, const Vector& phi, const Vector& p);

// F(p) = sum_k ( w_k(p) p*_k - p_k )^2
double objective_value(const Vector& lambda, const Vector& p_star, const Vector& p);

QoSolution solve(const RefinedModel& rm, const RefinedImage& img, const LseEstimate& est,
                 const QoConfig& cfg);

struct RestoreDiagnostics {
    double misfit = 0.0;
    double implied_alpha = 0.0;
    Vector lambda;
    FilterWeights weights;
};

// standardize -> decompose -> refine_image -> lse -> solve
std::pair<QoSolution, RestoreDiagnostics> restore(const GeneralModel& gm, const Vector& y0,
                                                  const QoConfig& cfg,
                                                  double rank_tol = 1e-10);

}  // namespace qof
