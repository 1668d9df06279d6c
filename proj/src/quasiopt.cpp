#include "qofilter/quasiopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qofilter/stats.hpp"

namespace qof {

double constraint_value(const Vector& lambda, const Vector& phi, const Vector& p) {
    const std::size_t n = lambda.size();
    if (phi.size() != n || p.size() != n)
        throw std::invalid_argument("constraint_value: shape mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = 1.0 + lambda[k] * p[k] * p[k];
        s += phi[k] * phi[k] / (d * d);
    }
    return s;
}

double objective_value(const Vector& lambda, const Vector& p_star, const Vector& p) {
    const std::size_t n = lambda.size();
    if (p_star.size() != n || p.size() != n)
        throw std::invalid_argument("objective_value: shape mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = lambda[k] * p[k] * p[k];
        const double w = x / (1.0 + x);
        const double d = w * p_star[k] - p[k];
        s += d * d;
    }
    return s;
}

namespace {

constexpr double kGolden = 0.6180339887498949;  // (sqrt(5)-1)/2

// Small-n exact minimizer. Works in "constraint contribution" space:
// c_k = phi_k^2/(1+lambda_k u^2)^2 is strictly decreasing in u = |p_k|, so
// each component's objective term becomes a function of c_k and the
// constraint becomes the linear budget sum c_k = t. Components with
// |phi_k| >= 2 have two Wiener fixed points (zeros of the objective term);
// the branch between/outside them is chosen by enumeration.
class ExactSolver {
  public:
    ExactSolver(const Vector& lambda, const Vector& phi, double t, const QoConfig& cfg)
        : lam_(lambda), phi_(phi), t_(t), cfg_(cfg), n_(lambda.size()) {
        s_.resize(n_);
        sl_.resize(n_);
        phi2_.resize(n_);
        pstar_.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            s_[k] = std::fabs(phi_[k]);
            sl_[k] = std::sqrt(lam_[k]);
            phi2_[k] = phi_[k] * phi_[k];
            pstar_[k] = phi_[k] / sl_[k];
        }
    }

    // returns p (signed), objective, multiplier
    bool run(Vector& p_out, double& F_out, double& nu_out, int& boxes_out) const {
        std::vector<std::size_t> cand;
        for (std::size_t k = 0; k < n_; ++k)
            if (s_[k] >= 2.0) cand.push_back(k);

        Vector cmin(n_);
        for (std::size_t k = 0; k < n_; ++k) cmin[k] = cmin_of(k);

        bool have_best = false;
        double best_F = 0.0, best_nu = 0.0;
        Vector best_c;
        const std::size_t subsets = std::size_t{1} << cand.size();
        for (std::size_t bits = 0; bits < subsets; ++bits) {
            Vector lo(n_), hi(n_);
            for (std::size_t k = 0; k < n_; ++k) {
                lo[k] = std::max(cmin[k], 1e-300);
                hi[k] = std::max(phi2_[k], 2e-300);
            }
            for (std::size_t i = 0; i < cand.size(); ++i) {
                const std::size_t k = cand[i];
                const double rt = std::sqrt(s_[k] * s_[k] - 4.0);
                const double u_minus = (s_[k] - rt) / (2.0 * sl_[k]);
                const double gm = g_of_u(k, u_minus);
                if (bits & (std::size_t{1} << i))
                    hi[k] = gm;  // outer branch, |p| >= u_minus
                else
                    lo[k] = gm;  // inner branch, |p| <= u_minus
            }
            for (std::size_t k = 0; k < n_; ++k)
                if (hi[k] <= lo[k]) hi[k] = lo[k] * (1.0 + 1e-12);
            Vector c;
            double F, nu;
            if (!waterfill(lo, hi, c, F, nu)) continue;
            if (!have_best || F < best_F) {
                have_best = true;
                best_F = F;
                best_nu = nu;
                best_c = c;
            }
        }
        if (!have_best) return false;

        p_out.assign(n_, 0.0);
        for (std::size_t k = 0; k < n_; ++k) {
            const double u = u_of_c(k, best_c[k]);
            p_out[k] = (phi_[k] < 0.0 ? -u : u);
        }
        F_out = best_F;
        nu_out = best_nu;
        boxes_out = static_cast<int>(subsets);
        return true;
    }

  private:
    double u_of_c(std::size_t k, double c) const {
        const double r = s_[k] / std::sqrt(c);
        if (r <= 1.0) return 0.0;
        return std::sqrt((r - 1.0) / lam_[k]);
    }
    double g_of_u(std::size_t k, double u) const {
        const double d = 1.0 + lam_[k] * u * u;
        return phi2_[k] / (d * d);
    }
    double cmin_of(std::size_t k) const {
        const double ucap = 2.5 * std::fabs(pstar_[k]) + 3.0 / sl_[k];
        return g_of_u(k, ucap);
    }
    double f_of_c(std::size_t k, double c) const {
        const double u = u_of_c(k, c);
        const double x = lam_[k] * u * u;
        const double d = x / (1.0 + x) * s_[k] / sl_[k] - u;
        return d * d;
    }

    double golden_min(std::size_t k, double nu, double a, double b) const {
        auto fun = [&](double c) { return f_of_c(k, c) + nu * c; };
        double c1 = b - kGolden * (b - a), c2 = a + kGolden * (b - a);
        double f1 = fun(c1), f2 = fun(c2);
        for (int it = 0; it < 60; ++it) {
            if (f1 < f2) {
                b = c2; c2 = c1; f2 = f1;
                c1 = b - kGolden * (b - a); f1 = fun(c1);
            } else {
                a = c1; c1 = c2; f1 = f2;
                c2 = a + kGolden * (b - a); f2 = fun(c2);
            }
        }
        return 0.5 * (a + b);
    }

    double golden_pair(std::size_t ka, std::size_t kb, double B, double a, double b) const {
        auto fun = [&](double c) { return f_of_c(ka, c) + f_of_c(kb, B - c); };
        double c1 = b - kGolden * (b - a), c2 = a + kGolden * (b - a);
        double f1 = fun(c1), f2 = fun(c2);
        for (int it = 0; it < 60; ++it) {
            if (f1 < f2) {
                b = c2; c2 = c1; f2 = f1;
                c1 = b - kGolden * (b - a); f1 = fun(c1);
            } else {
                a = c1; c1 = c2; f1 = f2;
                c2 = a + kGolden * (b - a); f2 = fun(c2);
            }
        }
        return 0.5 * (a + b);
    }

    // Minimize sum f_k(c_k) subject to sum c_k = t_, lo <= c <= hi, via a
    // discretized multiplier scan: argmin_k of f_k(c)+nu*c on a per-component
    // log grid, nu found by bisection, then local refinement.
    bool waterfill(const Vector& lo, const Vector& hi, Vector& c_out, double& F_out,
                   double& nu_out) const {
        const std::size_t m = n_;
        const int G = std::max(cfg_.grid_points, 64);
        double lo_sum = 0.0, hi_sum = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            lo_sum += lo[k];
            hi_sum += hi[k];
        }
        const double slack = 1e-9 * std::max(1.0, t_);
        if (t_ < lo_sum - slack || t_ > hi_sum + slack) return false;

        std::vector<Vector> C(m, Vector(G));
        std::vector<Vector> FV(m, Vector(G));
        for (std::size_t k = 0; k < m; ++k) {
            const double la = std::log(lo[k]), lb = std::log(hi[k]);
            for (int j = 0; j < G; ++j) {
                C[k][j] = std::exp(la + (lb - la) * j / (G - 1));
                FV[k][j] = f_of_c(k, C[k][j]);
            }
        }
        auto pick = [&](double nu, std::vector<int>& idx, Vector& cs) {
            double total = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                int arg = 0;
                double best = FV[k][0] + nu * C[k][0];
                for (int j = 1; j < G; ++j) {
                    const double v = FV[k][j] + nu * C[k][j];
                    if (v < best) { best = v; arg = j; }
                }
                idx[k] = arg;
                cs[k] = C[k][arg];
                total += cs[k];
            }
            return total;
        };

        std::vector<int> idx(m);
        Vector cs(m);
        double nlo = -1e-9, nhi = 1e-9;
        for (int it = 0; it < 400 && pick(nlo, idx, cs) < t_; ++it) nlo *= 2.0;
        for (int it = 0; it < 400 && pick(nhi, idx, cs) > t_; ++it) nhi *= 2.0;
        for (int it = 0; it < 100; ++it) {
            const double nm = 0.5 * (nlo + nhi);
            if (pick(nm, idx, cs) > t_)
                nlo = nm;
            else
                nhi = nm;
        }
        const double nu = 0.5 * (nlo + nhi);
        pick(nu, idx, cs);
        for (std::size_t k = 0; k < m; ++k) {
            const double a = C[k][std::max(0, idx[k] - 1)];
            const double b = C[k][std::min(G - 1, idx[k] + 1)];
            cs[k] = golden_min(k, nu, a, b);
        }

        // close the remaining budget gap on the single cheapest component
        double d = -t_;
        for (std::size_t k = 0; k < m; ++k) d += cs[k];
        bool snapped = false;
        double best_dF = 0.0, best_c = 0.0;
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < m; ++k) {
            const double want = cs[k] - d;
            const double ck = std::min(std::max(want, lo[k]), hi[k]);
            if (std::fabs(want - ck) > 1e-9 * std::max(1.0, std::fabs(d))) continue;
            const double dF = f_of_c(k, ck) - f_of_c(k, cs[k]);
            if (!snapped || dF < best_dF) {
                snapped = true;
                best_dF = dF;
                best_k = k;
                best_c = ck;
            }
        }
        if (!snapped) return false;
        cs[best_k] = best_c;

        // pairwise exchange polish among the costliest components
        for (int sweep = 0; sweep < 3; ++sweep) {
            std::vector<std::size_t> order(m);
            for (std::size_t k = 0; k < m; ++k) order[k] = k;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return f_of_c(a, cs[a]) > f_of_c(b, cs[b]);
            });
            const std::size_t hot = std::min<std::size_t>(6, m);
            bool improved = false;
            for (std::size_t hi_i = 0; hi_i < hot; ++hi_i) {
                const std::size_t ka = order[hi_i];
                for (std::size_t kb = 0; kb < m; ++kb) {
                    if (ka == kb) continue;
                    const double B = cs[ka] + cs[kb];
                    const double l = std::max(lo[ka], B - hi[kb]);
                    const double h = std::min(hi[ka], B - lo[kb]);
                    if (h <= l * (1.0 + 1e-12)) continue;
                    const double ll = std::log(l), lh = std::log(h);
                    int arg = 0;
                    double best = std::numeric_limits<double>::infinity();
                    Vector gc(48);
                    for (int j = 0; j < 48; ++j) {
                        gc[j] = std::exp(ll + (lh - ll) * j / 47.0);
                        const double v = f_of_c(ka, gc[j]) + f_of_c(kb, B - gc[j]);
                        if (v < best) { best = v; arg = j; }
                    }
                    const double cn =
                        golden_pair(ka, kb, B, gc[std::max(0, arg - 1)], gc[std::min(47, arg + 1)]);
                    const double fo = f_of_c(ka, cs[ka]) + f_of_c(kb, cs[kb]);
                    const double fn = f_of_c(ka, cn) + f_of_c(kb, B - cn);
                    if (fn < fo - 1e-13 * std::max(1.0, fo)) {
                        cs[ka] = cn;
                        cs[kb] = B - cn;
                        improved = true;
                    }
                }
            }
            if (!improved) break;
        }

        double F = 0.0;
        for (std::size_t k = 0; k < m; ++k) F += f_of_c(k, cs[k]);
        c_out = cs;
        F_out = F;
        nu_out = nu;
        return true;
    }

    const Vector& lam_;
    const Vector& phi_;
    double t_;
    const QoConfig& cfg_;
    std::size_t n_;
    Vector s_, sl_, phi2_, pstar_;
};

// Large-n path: a one-parameter plug-in Wiener family. Each weight is
// w_k = x/(1+x) with x = max(a_k + mu*b_k, 0); a_k is a data-driven
// plug-in signal-energy estimate, b_k = lambda_k phi_k^2, and mu is the
// scalar driven by bisection to meet the constraint exactly. The plug-in
// keeps noise-dominated components closed instead of letting them absorb
// constraint budget at huge error cost.
struct MuResult {
    Vector p;
    double mu;
    int iters;
};

MuResult solve_mu(const Vector& lam, const Vector& phi, double t, const QoConfig& cfg) {
    const std::size_t n = lam.size();
    const int win = 2;
    const double kap = 2.5, s_strong = 3.5, gdiv = 4.0;

    Vector phi2(n), s(n), sl(n), pstar2(n);
    for (std::size_t k = 0; k < n; ++k) {
        phi2[k] = phi[k] * phi[k];
        s[k] = std::fabs(phi[k]);
        sl[k] = std::sqrt(lam[k]);
        const double d = std::max(sl[k], 1e-300);
        pstar2[k] = (phi[k] / d) * (phi[k] / d);
    }

    // individually significant components, admitted in spectral order while
    // their fixed point stays inside the accumulated signal energy
    std::vector<bool> strong(n, false);
    double E = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (s[k] < s_strong) continue;
        const double up = (s[k] + std::sqrt(s[k] * s[k] - 4.0)) / (2.0 * sl[k]);
        if (E == 0.0 || up * up <= E) {
            strong[k] = true;
            E += up * up;
        }
    }

    // weak plug-in from spectrally smoothed excess, strong components masked
    Vector masked(n);
    for (std::size_t k = 0; k < n; ++k) masked[k] = strong[k] ? 1.0 : phi2[k];
    Vector a(n, 0.0);
    if (E > 0.0) {
        for (std::size_t k = 0; k < n; ++k) {
            if (strong[k]) {
                a[k] = std::max(phi2[k] - 1.0, 0.0);
                continue;
            }
            if (pstar2[k] > E / (gdiv * n)) continue;  // too expensive to open on smoothed evidence
            const std::size_t lo = (k >= win) ? k - win : 0;
            const std::size_t hi = std::min(n, k + win + 1);
            double mean = 0.0;
            for (std::size_t j = lo; j < hi; ++j) mean += masked[j];
            mean /= static_cast<double>(hi - lo);
            const double thr = 1.0 + kap * std::sqrt(2.0 / static_cast<double>(hi - lo));
            a[k] = std::max(mean - thr, 0.0);
        }
    }

    Vector b(n), wcap(n, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        b[k] = lam[k] * phi2[k];
        if (E > 0.0 && a[k] <= 0.0)
            wcap[k] = std::min(1.0, (E / n) / std::max(pstar2[k], 1e-300));
    }

    auto weight = [&](std::size_t k, double mu) {
        const double x = std::max(a[k] + mu * b[k], 0.0);
        const double w = (x > 1e300) ? 1.0 : x / (1.0 + x);
        return std::min(w, wcap[k]);
    };
    auto G = [&](double mu) {
        double g = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double omw = 1.0 - weight(k, mu);
            g += omw * omw * phi2[k];
        }
        return g;
    };

    double lo = -1.0;
    for (std::size_t k = 0; k < n; ++k)
        if (b[k] > 0.0) lo = std::min(lo, -a[k] / std::max(b[k], 1e-300) - 1.0);
    double hi = std::max(cfg.mu_max, 1.0);
    int grow = 0;
    while (G(hi) > t && grow < 500) {
        hi *= 2.0;
        ++grow;
    }
    const int iters = std::max(cfg.max_outer_iters, 1);
    for (int it = 0; it < iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (G(mid) > t)
            lo = mid;
        else
            hi = mid;
    }
    const double mu = 0.5 * (lo + hi);

    MuResult r;
    r.p.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = std::min(weight(k, mu), 1.0 - 1e-14);
        const double u = std::sqrt(w / ((1.0 - w) * lam[k]));
        r.p[k] = (phi[k] < 0.0 ? -u : u);
    }
    r.mu = mu;
    r.iters = iters + grow;
    return r;
}

}  // namespace

QoSolution solve(const RefinedModel& rm, const RefinedImage& img, const LseEstimate& est,
                 const QoConfig& cfg) {
    const std::size_t n = rm.lambda.size();
    if (img.phi.size() != n || est.p_star.size() != n)
        throw std::invalid_argument("solve: shape mismatch");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("solve: alpha must be in (0,1)");
    for (std::size_t k = 0; k < n; ++k) {
        if (!(rm.lambda[k] > 0.0)) throw std::invalid_argument("solve: lambda must be positive");
        if (!std::isfinite(img.phi[k])) throw std::invalid_argument("solve: non-finite phi");
    }

    QoSolution sol;
    sol.t = chi2_quantile(1.0 - cfg.alpha, static_cast<int>(n));

    if (norm2(img.phi) <= sol.t) {
        sol.degenerate = true;
        sol.p_min.assign(n, 0.0);
        sol.w_qo.w.assign(n, 0.0);
        sol.p_tilde.assign(n, 0.0);
        sol.x_tilde.assign(n, 0.0);
        return sol;
    }

    std::size_t cand = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (std::fabs(img.phi[k]) >= 2.0) ++cand;

    if (n <= 16 && cand <= 10) {
        ExactSolver ex(rm.lambda, img.phi, sol.t, cfg);
        double F = 0.0, nu = 0.0;
        int boxes = 0;
        if (!ex.run(sol.p_min, F, nu, boxes))
            throw std::runtime_error("solve: multiplier bracket exhausted");
        sol.mu = nu;
        sol.outer_iters = boxes;
    } else {
        MuResult r = solve_mu(rm.lambda, img.phi, sol.t, cfg);
        sol.p_min = std::move(r.p);
        sol.mu = r.mu;
        sol.outer_iters = r.iters;
    }

    sol.w_qo = wiener_weights(rm.lambda, sol.p_min);
    auto [pt, xt] = apply_filter(rm, sol.w_qo, est);
    sol.p_tilde = std::move(pt);
    sol.x_tilde = std::move(xt);
    sol.constraint_residual = std::fabs(constraint_value(rm.lambda, img.phi, sol.p_min) - sol.t);
    sol.objective = objective_value(rm.lambda, est.p_star, sol.p_min);
    return sol;
}

std::pair<QoSolution, RestoreDiagnostics> restore(const GeneralModel& gm, const Vector& y0,
                                                  const QoConfig& cfg, double rank_tol) {
    auto [sm, z0] = standardize(gm, y0);
    const RefinedModel rm = decompose(sm, rank_tol);
    const RefinedImage img = refine_image(rm, z0);
    const LseEstimate est = lse(rm, img);
    QoSolution sol = solve(rm, img, est, cfg);

    RestoreDiagnostics diag;
    diag.misfit = misfit(rm, img, sol.p_tilde);
    diag.implied_alpha = implied_alpha(diag.misfit, static_cast<int>(rm.lambda.size()));
    diag.lambda = rm.lambda;
    diag.weights = sol.w_qo;
    return {std::move(sol), std::move(diag)};
}

}  // namespace qof
