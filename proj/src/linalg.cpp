#include "qofilter/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qof {

Matrix Matrix::identity(std::size_t n) {
    Matrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
    if (A.cols != B.rows) throw std::invalid_argument("matmul: shape mismatch");
    Matrix C(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        for (std::size_t k = 0; k < A.cols; ++k) {
            const double aik = A(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
        }
    }
    return C;
}

Matrix transpose(const Matrix& A) {
    Matrix T(A.cols, A.rows);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
    return T;
}

Vector matvec(const Matrix& A, const Vector& v) {
    if (A.cols != v.size()) throw std::invalid_argument("matvec: shape mismatch");
    Vector y(A.rows, 0.0);
    for (std::size_t i = 0; i < A.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < A.cols; ++j) s += A(i, j) * v[j];
        y[i] = s;
    }
    return y;
}

double dot(const Vector& x, const Vector& y) {
    if (x.size() != y.size()) throw std::invalid_argument("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

namespace {

// column dot product of a row-major matrix
double col_dot(const Matrix& M, std::size_t p, std::size_t q) {
    double s = 0.0;
    for (std::size_t i = 0; i < M.rows; ++i) s += M(i, p) * M(i, q);
    return s;
}

void fix_column_signs(Matrix& U, Matrix& V) {
    for (std::size_t j = 0; j < V.cols; ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < V.rows; ++i) {
            const double m = std::fabs(V(i, j));
            if (m > best) { best = m; arg = i; }
        }
        if (V(arg, j) < 0.0) {
            for (std::size_t i = 0; i < V.rows; ++i) V(i, j) = -V(i, j);
            for (std::size_t i = 0; i < U.rows; ++i) U(i, j) = -U(i, j);
        }
    }
}

}  // namespace

SvdResult svd(const Matrix& A) {
    const std::size_t m = A.rows, n = A.cols;
    if (m < n) throw std::invalid_argument("svd: requires m >= n");
    for (double x : A.a)
        if (!std::isfinite(x)) throw std::invalid_argument("svd: non-finite entry");

    Matrix W = A;                     // columns rotated in place
    Matrix V = Matrix::identity(n);
    const int max_sweeps = 60;
    const double tol = 1e-14;

    bool converged = (n == 1);
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double app = col_dot(W, p, p);
                const double aqq = col_dot(W, q, q);
                const double apq = col_dot(W, p, q);
                if (std::fabs(apq) <= tol * std::sqrt(app * aqq)) continue;
                converged = false;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                             : 1.0 / (tau - std::sqrt(1.0 + tau * tau)));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double wp = W(i, p), wq = W(i, q);
                    W(i, p) = c * wp - s * wq;
                    W(i, q) = s * wp + c * wq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = V(i, p), vq = V(i, q);
                    V(i, p) = c * vp - s * vq;
                    V(i, q) = s * vp + c * vq;
                }
            }
        }
    }
    if (!converged)
        throw std::runtime_error("svd: one-sided Jacobi failed to converge within 60 sweeps");

    Vector delta(n);
    for (std::size_t j = 0; j < n; ++j) delta[j] = std::sqrt(col_dot(W, j, j));

    // descending order
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return delta[i] > delta[j]; });

    SvdResult r;
    r.U = Matrix(m, n);
    r.V = Matrix(n, n);
    r.delta.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        const double d = delta[src];
        r.delta[j] = d;
        const double inv = (d > 0.0 ? 1.0 / d : 0.0);
        for (std::size_t i = 0; i < m; ++i) r.U(i, j) = W(i, src) * inv;
        for (std::size_t i = 0; i < n; ++i) r.V(i, j) = V(i, src);
    }
    fix_column_signs(r.U, r.V);
    return r;
}

EigResult sym_eig(const Matrix& S) {
    const std::size_t n = S.rows;
    if (S.rows != S.cols) throw std::invalid_argument("sym_eig: matrix not square");
    double scale = 0.0, asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            scale = std::max(scale, std::fabs(S(i, j)));
            asym = std::max(asym, std::fabs(S(i, j) - S(j, i)));
        }
    if (asym > 1e-9 * std::max(1.0, scale))
        throw std::invalid_argument("sym_eig: matrix not symmetric within tolerance");

    Matrix D = S;
    Matrix Q = Matrix::identity(n);
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += D(i, j) * D(i, j);
        if (off <= 1e-28 * std::max(1.0, scale * scale)) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = D(p, q);
                if (std::fabs(apq) <= 1e-15 * std::max(1.0, scale)) continue;
                const double tau = (D(q, q) - D(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                             : 1.0 / (tau - std::sqrt(1.0 + tau * tau)));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double dip = D(i, p), diq = D(i, q);
                    D(i, p) = c * dip - s * diq;
                    D(i, q) = s * dip + c * diq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double dpi = D(p, i), dqi = D(q, i);
                    D(p, i) = c * dpi - s * dqi;
                    D(q, i) = s * dpi + c * dqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double qip = Q(i, p), qiq = Q(i, q);
                    Q(i, p) = c * qip - s * qiq;
                    Q(i, q) = s * qip + c * qiq;
                }
            }
        }
    }

    Vector vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = D(i, i);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return vals[i] > vals[j]; });

    EigResult r;
    r.Q = Matrix(n, n);
    r.vals.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        r.vals[j] = vals[order[j]];
        for (std::size_t i = 0; i < n; ++i) r.Q(i, j) = Q(i, order[j]);
    }
    return r;
}

Matrix inv_sqrt_spd(const Matrix& C) {
    const EigResult eg = sym_eig(C);
    const std::size_t n = C.rows;
    const double vmax = eg.vals.front();
    if (vmax <= 0.0 || eg.vals.back() <= 1e-12 * vmax)
        throw std::runtime_error("covariance not positive definite");
    Matrix M(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += eg.Q(i, k) * eg.Q(j, k) / std::sqrt(eg.vals[k]);
            M(i, j) = s;
        }
    return M;
}

}  // namespace qof
