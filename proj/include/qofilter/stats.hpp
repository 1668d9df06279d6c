#pragma once

#include <cstdint>
#include <random>

#include "qofilter/linalg.hpp"

namespace qof {

// Regularized lower incomplete gamma P(s, x).
double gamma_p(double s, double x);

// P(chi2_n <= t) via the regularized incomplete gamma P(n/2, t/2).
double chi2_cdf(double t, int n);

// Root of chi2_cdf(t, n) = gamma, bracketed bisection.
double chi2_quantile(double gamma, int n);

// Deterministic Gaussian stream: std::mt19937_64 (output sequence fixed by
// the standard) + our own Box-Muller transform, so noise streams reproduce
// bit-for-bit across builds and platforms.
class GaussianRng {
  public:
    explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}
    double uniform();  // (0, 1]
    double normal();   // N(0, 1)

  private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// White-noise sample: mean + sigma * z, z ~ N(0, I).
Vector gaussian_vector(std::uint64_t seed, const Vector& mean, double sigma);

// General covariance: mean + C^{1/2} z via the symmetric eigendecomposition.
Vector gaussian_vector(std::uint64_t seed, const Vector& mean, const Matrix& cov);

}  // namespace qof
