#include "hedgehog/experiments.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace hedgehog;

namespace {

struct Common {
    std::string geometry = "builtin:spheroid";
    int levels = 3;
    int q = 20;
    int p = 6;
    double a = 0.004;
    double b = 0.03;
    bool linear_scaling = false;
    std::vector<double> eps_target = {1e-4, 1e-5, 1e-6};
    std::uint64_t seed = 20240601;
    std::string out = ".";
    std::string kernel = "laplace";
    double poisson_ratio = 0.25;
    std::size_t initial_patches = 96;
    std::size_t max_targets = 0;
    int charges = 100;
    int degree = 12;
    double eps_g = 1e-10;
    int upsample_levels = 2;
    bool matrix_free = false;
    double lambda = 0.6;
    int torus_major = 8;
    int torus_minor = 4;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--geometry", c.geometry, "file or builtin:{sphere,spheroid,torus}");
    app->add_option("--levels", c.levels, "quadrisection levels")->check(CLI::PositiveNumber);
    app->add_option("--q", c.q, "Clenshaw-Curtis nodes per direction")->check(CLI::Range(2, 64));
    app->add_option("--p", c.p, "extrapolation order")->check(CLI::Range(1, 30));
    app->add_option("--a", c.a, "check point spacing factor");
    app->add_option("--b", c.b, "first check point distance factor");
    app->add_flag("--linear-scaling", c.linear_scaling, "R = bL, r = aL instead of b sqrt(L), a sqrt(L)");
    app->add_option("--eps-target", c.eps_target, "target accuracies")->expected(1, -1);
    app->add_option("--seed", c.seed, "charge placement seed");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--kernel", c.kernel, "laplace, stokes or elasticity")
        ->check(CLI::IsMember({"laplace", "stokes", "elasticity"}));
    app->add_option("--poisson-ratio", c.poisson_ratio, "elasticity Poisson ratio");
    app->add_option("--initial-patches", c.initial_patches, "patch count of the first level");
    app->add_option("--max-targets", c.max_targets, "evaluate at most this many targets per level (0 = all)");
    app->add_option("--charges", c.charges, "number of reference charges");
    app->add_option("--degree", c.degree, "Bezier degree of the fitted patches");
    app->add_option("--eps-g", c.eps_g, "geometry fitting tolerance");
    app->add_option("--upsample-levels", c.upsample_levels, "uniform upsampling levels (evaluate: -1 = adaptive)");
    app->add_flag("--matrix-free", c.matrix_free, "GMRES on matrix-free products");
    app->add_option("--lambda", c.lambda, "singularity distance in units of L when choosing b");
    app->add_option("--torus-major", c.torus_major, "torus quads along the major circle");
    app->add_option("--torus-minor", c.torus_minor, "torus quads along the minor circle");
}

KernelFamily make_kernel(const Common& c) {
    if (c.kernel == "stokes") return KernelFamily::stokes();
    if (c.kernel == "elasticity") return KernelFamily::elasticity(c.poisson_ratio);
    return KernelFamily::laplace();
}

ExperimentConfig experiment_config(const Common& c) {
    ExperimentConfig cfg;
    cfg.kernel = make_kernel(c);
    cfg.geometry = c.geometry;
    cfg.levels = c.levels;
    cfg.initial_patches = c.initial_patches;
    cfg.degree = c.degree;
    cfg.eps_g = c.eps_g;
    cfg.upsample_levels = c.upsample_levels;
    cfg.seed = c.seed;
    cfg.charges = c.charges;
    cfg.max_targets = c.max_targets;
    cfg.dense_operator = !c.matrix_free;
    cfg.eval.q = c.q;
    cfg.eval.p = c.p;
    cfg.eval.a = c.a;
    cfg.eval.b = c.b;
    cfg.eval.sqrt_scaling = !c.linear_scaling;
    cfg.eval.validate();
    return cfg;
}

std::ofstream open_output(const Common& c, const std::string& name) {
    fs::create_directories(c.out);
    const fs::path path = fs::path(c.out) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::cout << "writing " << path.string() << '\n';
    return out;
}

void report_order(const std::vector<ConvergenceRow>& rows) {
    if (rows.size() < 2) return;
    std::vector<double> h, e;
    for (const auto& r : rows) {
        h.push_back(r.max_length);
        e.push_back(r.error);
    }
    std::cout << "EOC " << estimated_order(h, e) << '\n';
}

void run_evaluate(const Common& c, const std::string& targets_path) {
    std::ifstream in(targets_path);
    const PointCloud targets = read_targets(in);
    const ExperimentConfig cfg = experiment_config(c);
    const auto ref = ReferenceSolution::on_sphere(cfg.kernel, c.charges, c.seed);
    BVProblem problem;
    problem.kernel = cfg.kernel;
    problem.data = ref.boundary_condition();
    problem.geometry = load_geometry(c.geometry);
    problem.degree = c.degree;
    problem.eval = cfg.eval;
    problem.eval.eps_target = c.eps_target.front();
    problem.admissibility.eps_g = problem.admissibility.eps_f = problem.eval.eps_target / 10;
    if (c.upsample_levels >= 0) problem.uniform_levels = c.upsample_levels;
    problem.dense_operator = cfg.dense_operator;
    const Solution sol = solve(problem);
    std::cout << "GMRES " << (sol.report.converged ? "converged" : "did not converge") << " in "
              << sol.report.iterations << " iterations, " << sol.assembly.disc->coarse().size()
              << " coarse / " << sol.assembly.disc->fine().size() << " fine patches\n";
    const FieldEvaluation field = evaluate_field(cfg.kernel, sol.assembly, sol.density, targets);
    const int d = cfg.kernel.dim();
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!field.inside[i]) continue;
        const auto exact = ref.value(targets.position(i));
        for (int a = 0; a < d; ++a) {
            err = std::max(err, std::abs(field.values[i * d + a] - exact[a]));
            scale = std::max(scale, std::abs(exact[a]));
        }
    }
    if (scale > 0) std::cout << "relative error against the reference " << err / scale << '\n';
    auto out = open_output(c, "evaluate.txt");
    write_evaluations(out, targets, field.labels, field.values, d);
    auto reports = open_output(c, "evaluate-refinement.txt");
    for (const auto& r : sol.assembly.reports) r.write(reports);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary integral experiments with extrapolated check-point quadrature"};
    app.require_subcommand(1);
    Common c;
    auto* greens = app.add_subcommand("greens-identity", "Green's identity residual per level");
    auto* solve_cmd = app.add_subcommand("solve", "solver convergence per level");
    auto* sweep = app.add_subcommand("extrapolation-sweep", "extrapolation error heatmap");
    auto* constant = app.add_subcommand("constant-density", "double layer of unit density on a sphere");
    auto* precision = app.add_subcommand("target-precision-sweep", "full pipeline per target accuracy");
    auto* evaluate = app.add_subcommand("evaluate", "solve with point-charge data and evaluate at targets");
    for (auto* sub : {greens, solve_cmd, sweep, constant, precision, evaluate}) add_common(sub, c);

    std::string targets_path;
    evaluate->add_option("--targets", targets_path, "text file of `x y z` lines")
        ->required()
        ->check(CLI::ExistingFile);

    std::vector<int> orders = {6, 8, 10, 12, 14};
    int grid = 60;
    sweep->add_option("--orders", orders, "extrapolation orders");
    sweep->add_option("--grid", grid, "points per axis")->check(CLI::Range(2, 1000));

    CLI11_PARSE(app, argc, argv);

    try {
        if (greens->parsed() || solve_cmd->parsed()) {
            const ExperimentConfig cfg = experiment_config(c);
            const bool is_solve = solve_cmd->parsed();
            const auto rows = is_solve ? run_solver_convergence(cfg, &std::cout)
                                       : run_greens_identity(cfg, &std::cout);
            auto out = open_output(c, is_solve ? "solve.csv" : "greens-identity.csv");
            write_csv(out, rows);
            report_order(rows);
        } else if (sweep->parsed()) {
            const auto rows = run_extrapolation_sweep(orders, log_grid(1e-2, 1.0, grid),
                                                      log_grid(1e-2, 1e1, grid));
            auto out = open_output(c, "extrapolation-sweep.csv");
            write_csv(out, rows);
        } else if (constant->parsed()) {
            // R = bL here; the convergence default b is far too small for a 6-patch sphere
            const double b = constant->count("--b") > 0 ? c.b : 0.15;
            const auto res = run_constant_density(c.q, b, c.p, &std::cout);
            auto out = open_output(c, "constant-density.csv");
            write_csv(out, res);
        } else if (evaluate->parsed()) {
            run_evaluate(c, targets_path);
        } else if (precision->parsed()) {
            PrecisionConfig cfg;
            cfg.targets = c.eps_target;
            // the sweep keeps its own q and target cap unless given
            if (precision->count("--q") > 0) cfg.q = c.q;
            if (precision->count("--max-targets") > 0) cfg.max_targets = c.max_targets;
            cfg.p = c.p;
            cfg.lambda = c.lambda;
            cfg.torus_major = c.torus_major;
            cfg.torus_minor = c.torus_minor;
            const auto rows = run_target_precision_sweep(cfg, &std::cout);
            auto out = open_output(c, "target-precision-sweep.csv");
            write_csv(out, rows);
            auto reports = open_output(c, "target-precision-sweep-refinement.txt");
            for (const auto& row : rows) {
                reports << "# eps_target " << row.eps_target << '\n';
                for (const auto& r : row.reports) r.write(reports);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
