#pragma once

#include <utility>

#include "qofilter/linalg.hpp"

namespace qof {

// Observation setup y0 = H x0 + xi, xi ~ N(a, C).
struct GeneralModel {
    Matrix H;  // m x n point spread function
    Vector a;  // length m noise mean
    Matrix C;  // m x m noise covariance, SPD
};

// Whitened model z0 = A x0 + eta, cov(eta) = I.
struct StandardModel {
    Matrix A;  // m x n
};

// SVD factors of A and the Fisher spectrum.
struct RefinedModel {
    Matrix U;      // m x n
    Vector delta;  // descending, > 0
    Matrix V;      // n x n
    Vector lambda; // lambda_k = delta_k^2
};

struct RefinedImage {
    Vector phi;  // length n
};

// z0 = C^{-1/2}(y0 - a), A = C^{-1/2} H.
std::pair<StandardModel, Vector> standardize(const GeneralModel& gm, const Vector& y0);

// SVD of A; rejects delta_n/delta_1 below rank_tol as rank-deficient.
// Severely ill-conditioned bundled cases pass an explicit lower value.
RefinedModel decompose(const StandardModel& sm, double rank_tol = 1e-10);

// phi = U^T z0.
RefinedImage refine_image(const RefinedModel& rm, const Vector& z0);

// p = V^T x and x = V p.
Vector principal_components(const RefinedModel& rm, const Vector& x);
Vector synthesize(const RefinedModel& rm, const Vector& p);

}  // namespace qof
