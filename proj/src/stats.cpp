#include "qofilter/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace qof {

namespace {

constexpr double kRelTol = 1e-14;

// series expansion of P(s, x), valid for x < s + 1
double gamma_p_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    for (int k = 1; k < 10000; ++k) {
        term *= x / (s + k);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kRelTol) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// continued fraction for Q(s, x) (modified Lentz), valid for x >= s + 1
double gamma_q_cf(double s, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kRelTol) break;
    }
    return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

}  // namespace

double gamma_p(double s, double x) {
    if (x < 0.0 || s <= 0.0) throw std::invalid_argument("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < s + 1.0) return gamma_p_series(s, x);
    return 1.0 - gamma_q_cf(s, x);
}

double chi2_cdf(double t, int n) {
    if (t < 0.0) throw std::invalid_argument("chi2_cdf: t must be >= 0");
    if (n < 1) throw std::invalid_argument("chi2_cdf: n must be >= 1");
    return gamma_p(0.5 * n, 0.5 * t);
}

double chi2_quantile(double gamma, int n) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("chi2_quantile: gamma must be in (0,1)");
    if (n < 1) throw std::invalid_argument("chi2_quantile: n must be >= 1");
    double lo = 0.0;
    double hi = n + 10.0 * std::sqrt(2.0 * n);
    int grow = 0;
    while (chi2_cdf(hi, n) < gamma && grow < 200) {
        hi *= 2.0;
        ++grow;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_cdf(mid, n) < gamma)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double GaussianRng::uniform() {
    // 53-bit mantissa draw mapped to (0, 1]
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

Vector gaussian_vector(std::uint64_t seed, const Vector& mean, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_vector: sigma must be >= 0");
    Vector out = mean;
    if (sigma == 0.0) return out;
    GaussianRng rng(seed);
    for (double& x : out) x += sigma * rng.normal();
    return out;
}

Vector gaussian_vector(std::uint64_t seed, const Vector& mean, const Matrix& cov) {
    if (cov.rows != cov.cols || cov.rows != mean.size())
        throw std::invalid_argument("gaussian_vector: shape mismatch");
    const EigResult eg = sym_eig(cov);
    if (eg.vals.front() <= 0.0 || eg.vals.back() <= 1e-12 * eg.vals.front())
        throw std::runtime_error("gaussian_vector: covariance not positive definite");
    const std::size_t m = mean.size();
    GaussianRng rng(seed);
    Vector z(m);
    for (double& x : z) x = rng.normal();
    Vector out = mean;
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k)
            s += eg.Q(i, k) * std::sqrt(eg.vals[k]) * z[k];
        out[i] += s;
    }
    return out;
}

}  // namespace qof
