#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "qofilter/simulation.hpp"
#include "qofilter/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_vector_csv(const fs::path& path, const qof::Vector& v) {
    std::ofstream f(path);
    f << "index,value\n";
    for (std::size_t i = 0; i < v.size(); ++i) f << i << "," << fmt(v[i]) << "\n";
}

void write_matrix_csv(const fs::path& path, const qof::Matrix& M) {
    std::ofstream f(path);
    f << "row,col,value\n";
    for (std::size_t i = 0; i < M.rows; ++i)
        for (std::size_t j = 0; j < M.cols; ++j) f << i << "," << j << "," << fmt(M(i, j)) << "\n";
}

qof::Vector read_vector_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line) || line.rfind("index", 0) != 0)
        throw std::invalid_argument("malformed csv header in " + path.string());
    qof::Vector v;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("malformed csv row in " + path.string());
        v.push_back(std::stod(line.substr(comma + 1)));
    }
    if (v.empty()) throw std::invalid_argument("empty csv " + path.string());
    return v;
}

qof::ModelCase build_case(const std::string& name, std::size_t n, std::uint64_t seed) {
    if (name == "lowfreq") return qof::model_case_low_freq(n, seed);
    if (name == "sharp-smooth") return qof::model_case_sharp_smooth(n, seed);
    throw std::invalid_argument("unknown case '" + name + "'");
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("QOFILTER_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

json model_to_json(const qof::ModelCase& mc, std::uint64_t seed) {
    json j;
    j["schema_version"] = 1;
    j["case"] = mc.name;
    j["n"] = mc.n;
    j["m"] = mc.m;
    j["seed"] = seed;
    j["noise"] = {{"mean_a", mc.noise.mean_a}, {"sigma_g", mc.noise.sigma_g}};
    return j;
}

int run_simulate(const std::string& case_name, std::size_t n, std::uint64_t seed,
                 const std::string& out_dir, bool emit_psf) {
    const qof::ModelCase mc = build_case(case_name, n, seed);
    const qof::Vector image0 = qof::matvec(mc.gm.H, mc.x0);
    const qof::Vector y = qof::gaussian_vector(seed, image0, mc.noise.sigma_g);
    fs::create_directories(out_dir);
    write_vector_csv(fs::path(out_dir) / "object.csv", mc.x0);
    write_vector_csv(fs::path(out_dir) / "image.csv", y);
    if (emit_psf) write_matrix_csv(fs::path(out_dir) / "psf_matrix.csv", mc.gm.H);
    std::ofstream mj(fs::path(out_dir) / "model.json");
    mj << model_to_json(mc, seed).dump(2) << "\n";
    return kExitOk;
}

int run_restore(const std::string& model_path, const std::string& image_path,
                const std::optional<std::string>& object_path, double alpha,
                const std::string& out_dir) {
    std::ifstream mf(model_path);
    if (!mf) throw std::invalid_argument("cannot open " + model_path);
    json mj;
    try {
        mf >> mj;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed model.json: ") + e.what());
    }
    const std::string case_name = mj.at("case").get<std::string>();
    const std::size_t n = mj.at("n").get<std::size_t>();
    const std::uint64_t seed = mj.value("seed", 0ULL);
    const qof::ModelCase mc = build_case(case_name, n, seed);

    const qof::Vector y0 = read_vector_csv(image_path);
    if (y0.size() != mc.m) throw std::invalid_argument("image.csv length does not match model");

    qof::QoConfig cfg;
    cfg.alpha = alpha;
    auto [sol, diag] = qof::restore(mc.gm, y0, cfg, mc.rank_tol);

    // recompute pipeline intermediates for the component table
    auto [sm, z0] = qof::standardize(mc.gm, y0);
    const qof::RefinedModel rm = qof::decompose(sm, mc.rank_tol);
    const qof::RefinedImage img = qof::refine_image(rm, z0);
    const qof::LseEstimate est = qof::lse(rm, img);

    std::optional<qof::Vector> p0;
    std::optional<qof::FilterWeights> w_opt;
    if (object_path) {
        const qof::Vector x0 = read_vector_csv(*object_path);
        if (x0.size() != mc.n) throw std::invalid_argument("object.csv length does not match model");
        p0 = qof::principal_components(rm, x0);
        w_opt = qof::wiener_weights(rm.lambda, *p0);
    }

    fs::create_directories(out_dir);
    write_vector_csv(fs::path(out_dir) / "estimate.csv", sol.x_tilde);

    {
        std::ofstream f(fs::path(out_dir) / "weights.csv");
        f << (w_opt ? "index,w_qo,w_opt\n" : "index,w_qo\n");
        for (std::size_t k = 0; k < sol.w_qo.w.size(); ++k) {
            f << k << "," << fmt(sol.w_qo.w[k]);
            if (w_opt) f << "," << fmt(w_opt->w[k]);
            f << "\n";
        }
    }
    {
        std::ofstream f(fs::path(out_dir) / "components.csv");
        f << (p0 ? "index,p0,p_star,p_tilde\n" : "index,p_star,p_tilde\n");
        for (std::size_t k = 0; k < est.p_star.size(); ++k) {
            f << k << ",";
            if (p0) f << fmt((*p0)[k]) << ",";
            f << fmt(est.p_star[k]) << "," << fmt(sol.p_tilde[k]) << "\n";
        }
    }
    json dj;
    dj["schema_version"] = 1;
    dj["misfit"] = diag.misfit;
    dj["implied_alpha"] = diag.implied_alpha;
    dj["lambda"] = diag.lambda;
    dj["mu"] = sol.mu;
    dj["iterations"] = sol.outer_iters;
    dj["constraint_residual"] = sol.constraint_residual;
    dj["objective"] = sol.objective;
    dj["degenerate"] = sol.degenerate;
    dj["t"] = sol.t;
    dj["alpha"] = alpha;
    std::ofstream df(fs::path(out_dir) / "diagnostics.json");
    df << dj.dump(2) << "\n";
    return kExitOk;
}

int run_compare(const std::string& case_name, std::size_t n, int trials, std::uint64_t seed,
                double alpha, const std::string& out_dir) {
    const qof::ModelCase mc = build_case(case_name, n, seed);
    qof::QoConfig cfg;
    cfg.alpha = alpha;
    const qof::McReport rep = qof::monte_carlo(mc, cfg, trials, seed);
    json j;
    j["schema_version"] = 1;
    j["case"] = case_name;
    j["trials"] = rep.trials;
    j["seed"] = seed;
    j["alpha"] = alpha;
    j["estimators"] = {
        {"lse", {{"mean_rms", rep.lse.mean_rms}, {"median_rms", rep.lse.median_rms}}},
        {"wiener_oracle",
         {{"mean_rms", rep.wiener_oracle.mean_rms}, {"median_rms", rep.wiener_oracle.median_rms}}},
        {"quasi_optimal",
         {{"mean_rms", rep.quasi_optimal.mean_rms}, {"median_rms", rep.quasi_optimal.median_rms}}}};
    j["implied_alpha_histogram"] = rep.alpha_histogram;
    j["fr_coverage"] = rep.fr_coverage;
    j["tail_energy_fraction"] = rep.tail_energy_fraction;
    j["degenerate_trials"] = rep.degenerate_trials;
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "report.json");
    f << j.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasi-optimal filtering for linear inverse problems"};
    app.require_subcommand(1);

    std::string case_name = "lowfreq";
    std::size_t n = 128;
    double alpha = 0.5;
    double gamma = 0.5;
    std::uint64_t seed = default_seed();
    int trials = 100;
    int dof = 1;
    std::string out_dir = ".";
    std::string model_path = "model.json";
    std::string image_path = "image.csv";
    std::string object_path;
    bool emit_psf = false;

    auto* sim = app.add_subcommand("simulate", "generate a bundled model case");
    sim->add_option("--case", case_name, "lowfreq or sharp-smooth");
    sim->add_option("--n", n, "object length");
    sim->add_option("--seed", seed, "noise seed");
    sim->add_option("--out", out_dir, "output directory");
    sim->add_flag("--psf-matrix", emit_psf, "also write psf_matrix.csv");

    auto* res = app.add_subcommand("restore", "run the quasi-optimal restoration");
    res->add_option("--model", model_path, "model.json from simulate");
    res->add_option("--image", image_path, "image.csv");
    res->add_option("--object", object_path, "optional true object (oracle weights)");
    res->add_option("--alpha", alpha, "significance level (default 0.5)");
    res->add_option("--out", out_dir, "output directory");

    auto* cmp = app.add_subcommand("compare", "Monte Carlo estimator comparison");
    cmp->add_option("--case", case_name, "lowfreq or sharp-smooth");
    cmp->add_option("--n", n, "object length");
    cmp->add_option("--trials", trials, "number of trials");
    cmp->add_option("--seed", seed, "base seed");
    cmp->add_option("--alpha", alpha, "significance level (default 0.5)");
    cmp->add_option("--out", out_dir, "output directory");

    auto* qt = app.add_subcommand("quantile", "chi-square quantile");
    qt->add_option("--gamma", gamma, "probability in (0,1)")->required();
    qt->add_option("--n", dof, "degrees of freedom")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sim->parsed()) return run_simulate(case_name, n, seed, out_dir, emit_psf);
        if (res->parsed())
            return run_restore(model_path, image_path,
                               object_path.empty() ? std::nullopt
                                                   : std::optional<std::string>(object_path),
                               alpha, out_dir);
        if (cmp->parsed()) return run_compare(case_name, n, trials, seed, alpha, out_dir);
        if (qt->parsed()) {
            if (!(gamma > 0.0 && gamma < 1.0) || dof < 1) {
                std::fprintf(stderr, "quantile: gamma must be in (0,1) and n >= 1\n");
                return kExitUsage;
            }
            std::printf("%.10g\n", qof::chi2_quantile(gamma, dof));
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitUsage;
}
