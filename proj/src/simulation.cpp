#include "qofilter/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qofilter/stats.hpp"

namespace qof {

double sinc2_psf(double R, double lag) {
    if (R <= 0.0) throw std::invalid_argument("sinc2_psf: R must be positive");
    const double t = lag / R;
    if (t == 0.0) return 1.0 / R;
    const double s = std::sin(M_PI * t) / (M_PI * t);
    return s * s / R;
}

double gaussian_psf(double sigma, double lag) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_psf: sigma must be positive");
    return std::exp(-lag * lag / (2.0 * sigma * sigma));
}

Matrix build_convolution_matrix(const PsfSpec& psf, std::size_t n, std::size_t m) {
    if (m < n) throw std::invalid_argument("build_convolution_matrix: requires m >= n");
    if (psf.support_halfwidth < 0)
        throw std::invalid_argument("build_convolution_matrix: empty support");
    auto kernel = [&](double lag) {
        switch (psf.kind) {
            case PsfKind::sinc2: return sinc2_psf(psf.R, lag);
            case PsfKind::gaussian: return gaussian_psf(psf.sigma_psf, lag);
            default: throw std::invalid_argument("build_convolution_matrix: custom kind needs a kernel");
        }
    };
    Matrix H(m, n);
    const long half = psf.support_halfwidth;
    for (std::size_t i = 0; i < m; ++i) {
        double row_sum = 0.0;
        const long lo = std::max<long>(0, static_cast<long>(i) - half);
        const long hi = std::min<long>(static_cast<long>(n) - 1, static_cast<long>(i) + half);
        if (hi < lo) throw std::invalid_argument("build_convolution_matrix: empty support row");
        for (long j = lo; j <= hi; ++j) {
            const double v = kernel(static_cast<double>(static_cast<long>(i) - j));
            H(i, static_cast<std::size_t>(j)) = v;
            row_sum += v;
        }
        for (long j = lo; j <= hi; ++j) H(i, static_cast<std::size_t>(j)) /= row_sum;
    }
    return H;
}

namespace {

GeneralModel white_noise_model(Matrix H, double sigma, std::size_t m) {
    GeneralModel gm;
    gm.H = std::move(H);
    gm.a.assign(m, 0.0);
    // noise-free cases keep unit covariance so whitening stays well defined
    gm.C = Matrix(m, m);
    const double var = (sigma > 0.0) ? sigma * sigma : 1.0;
    for (std::size_t i = 0; i < m; ++i) gm.C(i, i) = var;
    return gm;
}

}  // namespace

ModelCase model_case_low_freq(std::size_t n, std::uint64_t /*seed*/) {
    if (n < 32) throw std::invalid_argument("model_case_low_freq: n must be >= 32");
    ModelCase mc;
    mc.name = "lowfreq";
    mc.n = mc.m = n;
    mc.noise = NoiseSpec{0.0, 100.0};
    mc.x0.resize(n);
    for (std::size_t t = 0; t < n; ++t)
        mc.x0[t] = 1000.0 * std::sin(M_PI * t / (n - 1.0));
    PsfSpec psf;
    psf.kind = PsfKind::sinc2;
    psf.R = 9.0;
    psf.support_halfwidth = 45;  // 5R
    mc.gm = white_noise_model(build_convolution_matrix(psf, n, n), mc.noise.sigma_g, n);
    mc.rank_tol = 0.0;  // sinc^2 spectrum decays below the generic 1e-10 cutoff
    return mc;
}

ModelCase model_case_sharp_smooth(std::size_t n, std::uint64_t /*seed*/) {
    if (n < 64) throw std::invalid_argument("model_case_sharp_smooth: n must be >= 64");
    ModelCase mc;
    mc.name = "sharp-smooth";
    mc.n = mc.m = n;
    mc.noise = NoiseSpec{0.0, 100.0};
    mc.x0.resize(n);
    const double c = n / 3.0, s = n / 8.0;
    for (std::size_t t = 0; t < n; ++t)
        mc.x0[t] = 800.0 * std::exp(-(t - c) * (t - c) / (2.0 * s * s));
    mc.x0[static_cast<std::size_t>(0.6 * n)] += 1000.0;
    mc.x0[static_cast<std::size_t>(0.7 * n)] += 1000.0;
    PsfSpec psf;
    psf.kind = PsfKind::gaussian;
    psf.sigma_psf = 3.0;
    psf.support_halfwidth = 15;  // 5 sigma
    mc.gm = white_noise_model(build_convolution_matrix(psf, n, n), mc.noise.sigma_g, n);
    mc.rank_tol = 1e-12;
    return mc;
}

namespace {

double rms(const Vector& x, const Vector& ref) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - ref[i];
        s += d * d;
    }
    return std::sqrt(s / x.size());
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return (v.size() % 2) ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

McReport monte_carlo(const ModelCase& mc, const QoConfig& cfg, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("monte_carlo: trials must be >= 1");
    // the model is fixed across trials; decompose once
    const double sigma = mc.noise.sigma_g;
    GeneralModel gm = mc.gm;
    Vector image0 = matvec(gm.H, mc.x0);
    auto [sm, z_unused] = standardize(gm, image0);
    (void)z_unused;
    const RefinedModel rm = decompose(sm, mc.rank_tol);
    const Vector p0 = principal_components(rm, mc.x0);
    const FilterWeights w_opt = wiener_weights(rm.lambda, p0);
    const std::size_t n = mc.n;
    const int dof = static_cast<int>(n);

    // smallest-lambda quartile index range (lambda descending)
    const std::size_t q_lo = n - n / 4;

    McReport rep;
    rep.trials = trials;
    rep.alpha_histogram.assign(10, 0);
    std::vector<double> rms_lse, rms_w, rms_qo;
    double tail_sum = 0.0;
    int feas_count = 0;
    const Matrix W = inv_sqrt_spd(gm.C);  // whitening for per-trial data

    for (int trial = 0; trial < trials; ++trial) {
        Vector y = gaussian_vector(seed + static_cast<std::uint64_t>(trial), image0, sigma);
        Vector r(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - gm.a[i];
        const Vector z0 = matvec(W, r);
        const RefinedImage img = refine_image(rm, z0);
        const LseEstimate est = lse(rm, img);

        auto [p_w, x_w] = apply_filter(rm, w_opt, est);
        (void)p_w;
        const double res_w = weights_fr_residual(img, w_opt);
        const double ia = implied_alpha(res_w, dof);
        rep.implied_alpha.push_back(ia);
        const int bin = std::min(9, static_cast<int>(ia * 10.0));
        ++rep.alpha_histogram[bin];

        QoSolution sol = solve(rm, img, est, cfg);
        if (sol.degenerate) ++rep.degenerate_trials;

        rms_lse.push_back(rms(est.x_star, mc.x0));
        rms_w.push_back(rms(x_w, mc.x0));
        rms_qo.push_back(rms(sol.x_tilde, mc.x0));

        const double theta = misfit(rm, img, sol.p_tilde);
        if (feasible(theta, FeasibilitySpec{0.05, 0.05, dof})) ++feas_count;

        double tail = 0.0, total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double e = sol.p_tilde[k] * sol.p_tilde[k];
            total += e;
            if (k >= q_lo) tail += e;
        }
        tail_sum += (total > 0.0) ? tail / total : 0.0;
    }

    auto fill = [](McEstimatorStats& st, const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        st.mean_rms = m / v.size();
        st.median_rms = median(v);
    };
    fill(rep.lse, rms_lse);
    fill(rep.wiener_oracle, rms_w);
    fill(rep.quasi_optimal, rms_qo);
    rep.fr_coverage = static_cast<double>(feas_count) / trials;
    rep.tail_energy_fraction = tail_sum / trials;
    return rep;
}

}  // namespace qof
