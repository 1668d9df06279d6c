#pragma once

#include <cstdint>
#include <string>

#include "qofilter/quasiopt.hpp"

namespace qof {

enum class PsfKind { sinc2, gaussian, custom };

struct PsfSpec {
    PsfKind kind = PsfKind::sinc2;
    double R = 9.0;          // sinc^2 characteristic radius, pixels
    double sigma_psf = 3.0;  // Gaussian std, pixels
    int support_halfwidth = 45;
};

struct NoiseSpec {
    double mean_a = 0.0;
    double sigma_g = 100.0;
};

struct ModelCase {
    std::string name;
    Vector x0;
    GeneralModel gm;
    NoiseSpec noise;
    std::size_t n = 0;
    std::size_t m = 0;
    // delta_n/delta_1 acceptance for this case's decomposition; the bundled
    // sinc^2 case is extremely ill-conditioned by construction and needs a
    // far smaller threshold than the generic default
    double rank_tol = 0.0;
};

// R^{-1} sinc^2(lag/R), sinc(t) = sin(pi t)/(pi t)
double sinc2_psf(double R, double lag);

// unnormalized exp(-lag^2/(2 sigma^2)); rows are normalized in the builder
double gaussian_psf(double sigma, double lag);

// H[i][j] = kernel(i - j) over |i-j| <= support_halfwidth, rows normalized
// to unit sum
Matrix build_convolution_matrix(const PsfSpec& psf, std::size_t n, std::size_t m);

// x0(t) = 1000 sin(pi t/(n-1)), sinc^2 PSF R=9, white noise sigma=100
ModelCase model_case_low_freq(std::size_t n, std::uint64_t seed);

// broad Gaussian bump (800, sigma=n/8, center n/3) + unit-width spikes of
// 1000 at 0.6n and 0.7n; Gaussian PSF sigma=3, white noise sigma=100
ModelCase model_case_sharp_smooth(std::size_t n, std::uint64_t seed);

struct McEstimatorStats {
    double mean_rms = 0.0;
    double median_rms = 0.0;
};

struct McReport {
    McEstimatorStats lse;
    McEstimatorStats wiener_oracle;
    McEstimatorStats quasi_optimal;
    std::vector<double> implied_alpha;     // oracle Wiener residual, per trial
    std::vector<int> alpha_histogram;      // 10 bins over [0,1]
    double fr_coverage = 0.0;              // x_tilde feasibility rate (alpha1=alpha2=0.05)
    double tail_energy_fraction = 0.0;     // mean smallest-lambda-quartile energy share of x_tilde
    int degenerate_trials = 0;
    int trials = 0;
};

McReport monte_carlo(const ModelCase& mc, const QoConfig& cfg, int trials, std::uint64_t seed);

}  // namespace qof
