#pragma once

#include <cstddef>
#include <vector>

namespace qof {

using Vector = std::vector<double>;

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Matrix identity(std::size_t n);
};

struct SvdResult {
    Matrix U;      // m x n, column-orthogonal
    Vector delta;  // n singular values, descending, >= 0
    Matrix V;      // n x n orthogonal
};

struct EigResult {
    Matrix Q;     // orthogonal, columns are eigenvectors
    Vector vals;  // descending
};

// One-sided Jacobi SVD for m >= n. 60-sweep cap, 1e-14 relative
// off-diagonal threshold. V column signs fixed so the largest-magnitude
// entry of each column is positive.
SvdResult svd(const Matrix& A);

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
EigResult sym_eig(const Matrix& S);

// M with M*M*C = I; rejects matrices whose smallest eigenvalue is
// below 1e-12 x largest.
Matrix inv_sqrt_spd(const Matrix& C);

Matrix matmul(const Matrix& A, const Matrix& B);
Matrix transpose(const Matrix& A);
Vector matvec(const Matrix& A, const Vector& v);
double dot(const Vector& x, const Vector& y);
// squared Euclidean norm
double norm2(const Vector& v);

}  // namespace qof
