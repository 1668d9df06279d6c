#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qofilter/estimators.hpp"
#include "qofilter/model.hpp"
#include "qofilter/stats.hpp"

using namespace qof;

namespace {

Matrix random_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix A(m, n);
    for (double& x : A.a) x = u(eng);
    return A;
}

GeneralModel identity_model(std::size_t m, const Matrix& H) {
    GeneralModel gm;
    gm.H = H;
    gm.a.assign(m, 0.0);
    gm.C = Matrix::identity(m);
    return gm;
}

}  // namespace

TEST_CASE("standardize with identity covariance is a no-op") {
    const Matrix H = random_matrix(5, 3, 1);
    const GeneralModel gm = identity_model(5, H);
    const Vector y0{1, 2, 3, 4, 5};
    auto [sm, z0] = standardize(gm, y0);
    CHECK(z0 == y0);
    for (std::size_t i = 0; i < H.a.size(); ++i)
        CHECK(sm.A.a[i] == doctest::Approx(H.a[i]).epsilon(1e-12));
}

TEST_CASE("standardize with scalar covariance divides by sigma") {
    const Matrix H = random_matrix(4, 2, 2);
    GeneralModel gm = identity_model(4, H);
    const double sigma = 2.5;
    for (std::size_t i = 0; i < 4; ++i) gm.C(i, i) = sigma * sigma;
    gm.a.assign(4, 1.0);
    const Vector y0{2, 4, 6, 8};
    auto [sm, z0] = standardize(gm, y0);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(z0[i] == doctest::Approx((y0[i] - 1.0) / sigma).epsilon(1e-10));
    for (std::size_t i = 0; i < H.a.size(); ++i)
        CHECK(sm.A.a[i] == doctest::Approx(H.a[i] / sigma).epsilon(1e-10));
}

TEST_CASE("whitened noise has near-identity covariance (monte carlo)") {
    const std::size_t m = 6;
    const Matrix B = random_matrix(m, m, 3);
    Matrix C = matmul(B, transpose(B));
    for (std::size_t i = 0; i < m; ++i) C(i, i) += 1.0;
    const Matrix W = inv_sqrt_spd(C);

    const int reps = 2000;
    Matrix acc(m, m);
    for (int r = 0; r < reps; ++r) {
        const Vector xi = gaussian_vector(100 + r, Vector(m, 0.0), C);
        const Vector eta = matvec(W, xi);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) acc(i, j) += eta[i] * eta[j] / reps;
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            CHECK(std::fabs(acc(i, j) - (i == j ? 1.0 : 0.0)) <= 0.1);
}

TEST_CASE("decompose identity and scaled identity") {
    StandardModel sm{Matrix::identity(4)};
    const RefinedModel rm = decompose(sm);
    for (double d : rm.delta) CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
    for (double l : rm.lambda) CHECK(l == doctest::Approx(1.0).epsilon(1e-12));

    Matrix A2 = Matrix::identity(3);
    for (double& x : A2.a) x *= 2.0;
    const RefinedModel rm2 = decompose(StandardModel{A2});
    for (double l : rm2.lambda) CHECK(l == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("decompose random 32x16 lambda matches eigen oracle") {
    const Matrix A = random_matrix(32, 16, 4);
    const RefinedModel rm = decompose(StandardModel{A});
    const EigResult eg = sym_eig(matmul(transpose(A), A));
    for (std::size_t k = 0; k < 16; ++k)
        CHECK(std::fabs(rm.lambda[k] - eg.vals[k]) <= 1e-9 * std::max(1.0, eg.vals[k]));
    // lambda = delta^2 exactly as computed
    for (std::size_t k = 0; k < 16; ++k) CHECK(rm.lambda[k] == rm.delta[k] * rm.delta[k]);
}

TEST_CASE("decompose rejects rank-deficient A") {
    Matrix A(3, 2);
    A(0, 0) = 1.0;
    A(1, 1) = 1e-14;
    CHECK_THROWS_WITH_AS(decompose(StandardModel{A}), doctest::Contains("rank-deficient"),
                         std::runtime_error);
}

TEST_CASE("refine_image recovers coefficients of U columns") {
    const Matrix A = random_matrix(12, 5, 8);
    const RefinedModel rm = decompose(StandardModel{A});
    const Vector c{1.0, -2.0, 0.5, 3.0, -1.0};
    Vector z0(12, 0.0);
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t k = 0; k < 5; ++k) z0[i] += rm.U(i, k) * c[k];
    const RefinedImage img = refine_image(rm, z0);
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(img.phi[k] == doctest::Approx(c[k]).epsilon(1e-10));
}

TEST_CASE("noise-free image refines to Delta V^T x0") {
    const Matrix A = random_matrix(10, 6, 12);
    const RefinedModel rm = decompose(StandardModel{A});
    std::mt19937_64 eng(77);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Vector x0(6);
    for (double& x : x0) x = u(eng);
    const Vector z0 = matvec(A, x0);
    const RefinedImage img = refine_image(rm, z0);
    const Vector p0 = principal_components(rm, x0);
    for (std::size_t k = 0; k < 6; ++k)
        CHECK(img.phi[k] == doctest::Approx(rm.delta[k] * p0[k]).epsilon(1e-9));
}

TEST_CASE("refined image mean chi2 contract under noise") {
    const Matrix A = random_matrix(8, 4, 21);
    const RefinedModel rm = decompose(StandardModel{A});
    Vector x0{1.0, 2.0, -1.0, 0.5};
    const Vector p0 = principal_components(rm, x0);
    const Vector z_clean = matvec(A, x0);
    const int reps = 2000, n = 4;
    double acc = 0.0;
    for (int r = 0; r < reps; ++r) {
        const Vector z0 = gaussian_vector(900 + r, z_clean, 1.0);
        const RefinedImage img = refine_image(rm, z0);
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
            const double d = img.phi[k] - rm.delta[k] * p0[k];
            s += d * d;
        }
        acc += s;
    }
    acc /= reps;
    CHECK(std::fabs(acc - n) <= 4.0 * std::sqrt(2.0 * n / static_cast<double>(reps)) * std::sqrt(n));
}

TEST_CASE("principal components round trip and norm preservation") {
    const Matrix A = random_matrix(9, 7, 31);
    const RefinedModel rm = decompose(StandardModel{A});
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    Vector x(7);
    for (double& v : x) v = u(eng);
    const Vector p = principal_components(rm, x);
    const Vector back = synthesize(rm, p);
    for (std::size_t i = 0; i < 7; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
    CHECK(std::fabs(norm2(p) - norm2(x)) <= 1e-10 * norm2(x));
}

TEST_CASE("noise-free end-to-end recovers p0 through lse") {
    const Matrix H = random_matrix(8, 5, 14);
    GeneralModel gm = identity_model(8, H);
    Vector x0{1.0, -0.5, 2.0, 0.25, -1.5};
    const Vector y0 = matvec(H, x0);
    auto [sm, z0] = standardize(gm, y0);
    const RefinedModel rm = decompose(sm);
    const RefinedImage img = refine_image(rm, z0);
    const LseEstimate est = lse(rm, img);
    const Vector p0 = principal_components(rm, x0);
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(std::fabs(est.p_star[k] - p0[k]) <= 1e-8 * std::max(1.0, std::fabs(p0[k])));
}
