#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qofilter/stats.hpp"

using namespace qof;

TEST_CASE("chi2_cdf closed forms") {
    CHECK(chi2_cdf(0.0, 1) == 0.0);
    CHECK(chi2_cdf(0.0, 10) == 0.0);
    // chi2_2 is exponential: CDF 1 - exp(-t/2)
    CHECK(chi2_cdf(2.0 * std::log(2.0), 2) == doctest::Approx(0.5).epsilon(1e-12));
    // classic table value
    CHECK(chi2_cdf(18.307, 10) == doctest::Approx(0.95).epsilon(2e-4));
    CHECK_THROWS(chi2_cdf(-1.0, 2));
}

TEST_CASE("chi2_cdf is monotone in t") {
    for (int n : {1, 4, 32}) {
        double prev = 0.0;
        for (double t = 0.25; t < 3.0 * n; t += 0.25) {
            const double c = chi2_cdf(t, n);
            CHECK(c > prev);
            prev = c;
        }
    }
}

TEST_CASE("chi2_quantile closed forms and round trips") {
    CHECK(chi2_quantile(0.5, 2) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));
    CHECK(chi2_quantile(0.5, 1) == doctest::Approx(0.45493642311957).epsilon(1e-9));
    for (double g : {0.05, 0.5, 0.95})
        for (int n : {1, 10, 128})
            CHECK(std::fabs(chi2_cdf(chi2_quantile(g, n), n) - g) <= 1e-8);
    CHECK_THROWS(chi2_quantile(0.0, 2));
    CHECK_THROWS(chi2_quantile(1.5, 2));
}

TEST_CASE("gaussian_vector white-noise contract") {
    const Vector mean(10, 1.5);
    const Vector zero_sigma = gaussian_vector(7, mean, 0.0);
    for (double x : zero_sigma) CHECK(x == 1.5);

    const Vector a = gaussian_vector(123, mean, 2.0);
    const Vector b = gaussian_vector(123, mean, 2.0);
    CHECK(a == b);  // determinism contract
    const Vector c = gaussian_vector(124, mean, 2.0);
    CHECK(a != c);
}

TEST_CASE("gaussian_vector law of large numbers") {
    const std::size_t m = 10000;
    const double sigma = 100.0;
    const Vector x = gaussian_vector(2024, Vector(m, 0.0), sigma);
    double mean = 0.0, var = 0.0;
    for (double v : x) mean += v;
    mean /= m;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= (m - 1);
    CHECK(std::fabs(mean) <= 4.0 * sigma / std::sqrt(static_cast<double>(m)));
    CHECK(std::fabs(var - sigma * sigma) <= 0.05 * sigma * sigma);
}

TEST_CASE("monte carlo chi2 mean: ||zeta||^2 over standard normal 64-vectors") {
    const int n = 64, reps = 2000;
    double acc = 0.0;
    for (int r = 0; r < reps; ++r)
        acc += norm2(gaussian_vector(5000 + r, Vector(n, 0.0), 1.0));
    acc /= reps;
    const double margin = 4.0 * std::sqrt(2.0 * n / static_cast<double>(reps));
    CHECK(std::fabs(acc - n) <= margin);
}

TEST_CASE("gaussian_vector with full covariance") {
    Matrix C(3, 3);
    C(0, 0) = 2.0;
    C(1, 1) = 1.0;
    C(2, 2) = 0.5;
    const Vector a = gaussian_vector(9, Vector(3, 0.0), C);
    const Vector b = gaussian_vector(9, Vector(3, 0.0), C);
    CHECK(a == b);
    Matrix bad(2, 2);
    bad(0, 0) = 1.0;
    bad(1, 1) = -1.0;
    CHECK_THROWS(gaussian_vector(1, Vector(2, 0.0), bad));
}
