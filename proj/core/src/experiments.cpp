#include "hedgehog/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace hedgehog {

namespace {

constexpr double kSphereRadius = 0.5;
constexpr double kSpheroidEquatorial = 0.45;
constexpr double kSpheroidPolar = 0.6;
constexpr double kTorusMajor = 0.55;
constexpr double kTorusMinor = 0.25;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::size_t> stride_subset(std::size_t n, std::size_t max_count) {
    std::vector<std::size_t> ids;
    if (max_count == 0 || max_count >= n) {
        ids.resize(n);
        for (std::size_t i = 0; i < n; ++i) ids[i] = i;
        return ids;
    }
    const double step = static_cast<double>(n) / static_cast<double>(max_count);
    for (std::size_t k = 0; k < max_count; ++k)
        ids.push_back(static_cast<std::size_t>(std::floor(k * step + 0.5 * step)));
    return ids;
}

// Surface points of an independent tensor rule on every coarse patch.
std::vector<SurfacePoint> independent_points(const PatchSet& set, int q_eval) {
    const auto nodes = cc_rule(q_eval).nodes;
    std::vector<SurfacePoint> points;
    points.reserve(set.size() * q_eval * q_eval);
    for (std::size_t i = 0; i < set.size(); ++i)
        for (double s : nodes)
            for (double t : nodes) points.push_back({static_cast<int>(i), s, t, 0.0, false});
    return points;
}

// Level l keeps max_targets / 4^l targets (at least 16) so the direct-summation cost per
// level stays roughly constant as the patch count quadruples.
std::size_t level_targets(std::size_t max_targets, int level) {
    if (max_targets == 0) return 0;
    return std::max<std::size_t>(16, max_targets >> (2 * level));
}

void log_line(std::ostream* log, const std::string& text) {
    if (log) *log << text << std::endl;
}

}  // namespace

QuadMesh builtin_spheroid() { return make_spheroid(kSpheroidEquatorial, kSpheroidPolar); }

QuadMesh builtin_torus(int n_major, int n_minor) {
    return make_torus(kTorusMajor, kTorusMinor, n_major, n_minor);
}

QuadMesh load_geometry(const std::string& spec) {
    const std::string prefix = "builtin:";
    if (spec.rfind(prefix, 0) == 0) {
        std::string name = spec.substr(prefix.size());
        std::vector<double> args;
        if (const auto colon = name.find(':'); colon != std::string::npos) {
            std::stringstream list(name.substr(colon + 1));
            name.resize(colon);
            for (std::string item; std::getline(list, item, ',');) {
                try {
                    args.push_back(std::stod(item));
                } catch (const std::exception&) {
                    throw UsageError("bad geometry parameter '" + item + "' in " + spec);
                }
            }
        }
        auto arg = [&](std::size_t i, double fallback) { return i < args.size() ? args[i] : fallback; };
        if (name == "sphere") return make_sphere(arg(0, kSphereRadius));
        if (name == "spheroid")
            return make_spheroid(arg(0, kSpheroidEquatorial), arg(1, kSpheroidPolar));
        if (name == "torus") return make_torus(arg(0, kTorusMajor), arg(1, kTorusMinor));
        throw UsageError("unknown built-in geometry '" + name + "'");
    }
    QuadMesh mesh;
    for (BezierPatch& p : read_geometry_file(spec)) mesh.quads.push_back(bezier_embedding(std::move(p)));
    mesh.build_links();
    return mesh;
}

ReferenceSolution ReferenceSolution::on_sphere(const KernelFamily& kernel, int count,
                                               std::uint64_t seed, double radius,
                                               const Vec3& center) {
    if (count < 0) throw UsageError("charge count must be >= 0");
    ReferenceSolution ref;
    ref.kernel = kernel;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
        Vec3 d(gauss(rng), gauss(rng), gauss(rng));
        ref.charges.push_back(center + radius * d.normalized());
        for (int k = 0; k < kernel.dim(); ++k) ref.strengths.push_back(unit(rng));
    }
    return ref;
}

ReferenceSolution ReferenceSolution::single(const KernelFamily& kernel, const Vec3& at,
                                            const Eigen::VectorXd& strength) {
    if (strength.size() != kernel.dim()) throw UsageError("strength dimension does not match kernel");
    ReferenceSolution ref;
    ref.kernel = kernel;
    ref.charges.push_back(at);
    for (int k = 0; k < kernel.dim(); ++k) ref.strengths.push_back(strength[k]);
    return ref;
}

Eigen::VectorXd ReferenceSolution::value(const Vec3& x) const {
    const int d = kernel.dim();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < charges.size(); ++i) {
        const Eigen::Map<const Eigen::VectorXd> psi(strengths.data() + i * d, d);
        u += fundamental_solution(kernel, x, charges[i]) * psi;
    }
    return u;
}

Eigen::VectorXd ReferenceSolution::traction(const Vec3& x, const Vec3& n) const {
    const int d = kernel.dim();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < charges.size(); ++i) {
        const Vec3 r = x - charges[i];
        const double rho = r.norm();
        if (rho == 0.0) throw DomainError("traction evaluated at a charge");
        const double inv3 = 1.0 / (rho * rho * rho);
        if (kernel.family == Family::Laplace) {
            out[0] -= strengths[i] * detail::inv4pi * r.dot(n) * inv3;
            continue;
        }
        const Vec3 psi(strengths[3 * i], strengths[3 * i + 1], strengths[3 * i + 2]);
        const double rpsi = r.dot(psi);
        const double inv5 = inv3 / (rho * rho);
        const double mu = kernel.family == Family::Stokes ? kernel.viscosity : kernel.shear_modulus;
        double c, diag_coef;
        if (kernel.family == Family::Stokes) {
            c = 0.5 * detail::inv4pi / mu;
            diag_coef = 1.0;
        } else {
            const double nu = kernel.poisson_ratio;
            c = 0.25 * detail::inv4pi / (mu * (1.0 - nu));
            diag_coef = 3.0 - 4.0 * nu;
        }
        // grad(i, j) = d u_i / d x_j
        Mat3 grad;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                grad(a, b) = c * (-diag_coef * psi[a] * r[b] * inv3 + (a == b ? rpsi * inv3 : 0.0) +
                                  r[a] * psi[b] * inv3 - 3.0 * r[a] * r[b] * rpsi * inv5);
        Mat3 sigma = mu * (grad + grad.transpose());
        if (kernel.family == Family::Stokes) {
            const double pressure = detail::inv4pi * rpsi * inv3;
            sigma -= pressure * Mat3::Identity();
        } else {
            const double nu = kernel.poisson_ratio;
            const double lambda = 2.0 * mu * nu / (1.0 - 2.0 * nu);
            sigma += lambda * grad.trace() * Mat3::Identity();
        }
        out += sigma * n;
    }
    return out;
}

BoundaryCondition ReferenceSolution::boundary_condition() const {
    BoundaryCondition bc;
    bc.dim = kernel.dim();
    bc.smoothness = 1000;
    bc.evaluator = [ref = *this](const Vec3& x) { return ref.value(x); };
    return bc;
}

EvalOptions ExperimentConfig::default_convergence_options() {
    EvalOptions o;
    o.q = 20;
    o.p = 6;
    o.b = 0.03;
    o.a = 0.004;
    o.sqrt_scaling = true;
    return o;
}

std::vector<PatchSet> convergence_levels(const ExperimentConfig& config) {
    if (config.levels < 1) throw UsageError("at least one level required");
    PatchSet set = refine_for_geometry(load_geometry(config.geometry), config.degree, config.eps_g)
                       .patches;
    while (set.size() < config.initial_patches) set = quadrisect_all(set);
    std::vector<PatchSet> levels;
    levels.push_back(set);
    for (int l = 1; l < config.levels; ++l) levels.push_back(quadrisect_all(levels.back()));
    return levels;
}

std::vector<ConvergenceRow> run_greens_identity(const ExperimentConfig& config, std::ostream* log) {
    const ReferenceSolution ref =
        ReferenceSolution::on_sphere(config.kernel, config.charges, config.seed);
    const int dim = config.kernel.dim();
    std::vector<ConvergenceRow> rows;
    int level = 0;
    for (PatchSet& coarse : convergence_levels(config)) {
        ConvergenceRow row;
        row.level = level++;
        row.coarse_patches = coarse.size();
        row.max_length = coarse.max_length();
        PatchSet fine = uniform_upsample(coarse, config.upsample_levels);
        row.fine_patches = fine.size();
        const Discretization disc(std::move(coarse), std::move(fine), config.eval);
        const QuadratureNodeSet& nodes = disc.coarse_nodes();

        DensityField u(dim, nodes.size()), du(dim, nodes.size());
        for (std::size_t I = 0; I < nodes.size(); ++I) {
            const Eigen::VectorXd v = ref.value(nodes.position(I));
            const Eigen::VectorXd t = ref.traction(nodes.position(I), nodes.normal(I));
            for (int k = 0; k < dim; ++k) {
                u.values[I * dim + k] = v[k];
                du.values[I * dim + k] = t[k];
            }
        }
        const auto subset = stride_subset(nodes.size(), level_targets(config.max_targets, row.level));
        row.targets = subset.size();
        const auto start = std::chrono::steady_clock::now();
        const auto single = evaluate_at_nodes(config.kernel, Layer::Single, disc, du, subset);
        const auto dbl = evaluate_at_nodes(config.kernel, Layer::Double, disc, u, subset);
        const double elapsed = seconds_since(start);
        double err = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < subset.size(); ++k) {
            for (int c = 0; c < dim; ++c) {
                const double exact = u.values[subset[k] * dim + c];
                err = std::max(err, std::abs(single[k * dim + c] + dbl[k * dim + c] - exact));
                scale = std::max(scale, std::abs(exact));
            }
        }
        row.error = scale > 0.0 ? err / scale : err;
        row.targets_per_second = elapsed > 0.0 ? subset.size() / elapsed : 0.0;
        log_line(log, "greens-identity level " + std::to_string(row.level) + ": " +
                          std::to_string(row.coarse_patches) + " patches, error " +
                          std::to_string(row.error));
        rows.push_back(row);
    }
    return rows;
}

std::vector<ConvergenceRow> run_solver_convergence(const ExperimentConfig& config,
                                                   std::ostream* log) {
    const ReferenceSolution ref =
        ReferenceSolution::on_sphere(config.kernel, config.charges, config.seed);
    const int dim = config.kernel.dim();
    BVProblem problem;
    problem.kernel = config.kernel;
    problem.data = ref.boundary_condition();
    problem.eval = config.eval;
    problem.uniform_levels = config.upsample_levels;
    problem.dense_operator = config.dense_operator;
    const int q_eval = config.eval_q > 0 ? config.eval_q : config.eval.q - 2;

    std::vector<ConvergenceRow> rows;
    int level = 0;
    for (PatchSet& coarse : convergence_levels(config)) {
        ConvergenceRow row;
        row.level = level++;
        row.coarse_patches = coarse.size();
        row.max_length = coarse.max_length();
        const PatchSet coarse_copy = coarse;
        Solution sol = solve(problem, assemble_from_patches(problem, std::move(coarse)));
        row.fine_patches = sol.report.fine_patches;
        row.iterations = sol.report.iterations;
        row.residual = sol.report.residual;

        const auto all = independent_points(coarse_copy, q_eval);
        const auto subset = stride_subset(all.size(), level_targets(config.max_targets, row.level));
        std::vector<SurfacePoint> points;
        for (std::size_t k : subset) points.push_back(all[k]);
        const auto start = std::chrono::steady_clock::now();
        const auto values = evaluate_on_surface(config.kernel, Layer::Double, *sol.assembly.disc,
                                                sol.density, points);
        const double elapsed = seconds_since(start);
        double err = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < points.size(); ++k) {
            const Eigen::VectorXd exact =
                ref.value(coarse_copy[points[k].patch].evaluate(points[k].s, points[k].t));
            for (int c = 0; c < dim; ++c) {
                err = std::max(err, std::abs(values[k * dim + c] - exact[c]));
                scale = std::max(scale, std::abs(exact[c]));
            }
        }
        row.targets = points.size();
        row.error = scale > 0.0 ? err / scale : err;
        row.targets_per_second = elapsed > 0.0 ? points.size() / elapsed : 0.0;
        log_line(log, "solve level " + std::to_string(row.level) + ": " +
                          std::to_string(row.coarse_patches) + " patches, " +
                          std::to_string(row.iterations) + " iterations, error " +
                          std::to_string(row.error));
        rows.push_back(row);
    }
    return rows;
}

double estimated_order(std::span<const double> lengths, std::span<const double> errors) {
    if (lengths.size() != errors.size() || lengths.size() < 2)
        throw UsageError("order fit needs at least two (length, error) pairs");
    const std::size_t n = lengths.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lengths[i] > 0.0 && errors[i] > 0.0))
            throw UsageError("order fit needs positive lengths and errors");
        const double x = std::log(lengths[i]), y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double extrapolation_error(int p, double R, double r, double rho) {
    if (!(rho < 0.0)) throw UsageError("the singularity must lie behind the surface (rho < 0)");
    std::vector<double> values(p + 1);
    for (int i = 0; i <= p; ++i) values[i] = 1.0 / std::abs(R + i * r - rho);
    const double exact = 1.0 / std::abs(rho);
    return std::abs(extrapolate(values, -R / r) - exact) / exact;
}

std::vector<SweepRow> run_extrapolation_sweep(const std::vector<int>& orders,
                                              const std::vector<double>& r_over_rho,
                                              const std::vector<double>& rp_over_r, double rho) {
    std::vector<SweepRow> rows;
    for (int p : orders) {
        for (double x : r_over_rho) {
            for (double y : rp_over_r) {
                const double R = x * std::abs(rho);
                const double r = y * R / p;
                const double e = extrapolation_error(p, R, r, rho);
                rows.push_back({p, x, y, std::log10(std::max(e, 1e-300))});
            }
        }
    }
    return rows;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0 && hi > lo) || n < 2) throw UsageError("invalid log grid");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return g;
}

ConstantDensityResult run_constant_density(int q, double b, int p, std::ostream* log) {
    EvalOptions opts;
    opts.q = q;
    opts.p = p;
    opts.b = b;
    opts.a = b / p;
    AdmissibilityConfig adm;
    adm.check = opts;
    adm.eps_g = 1e-8;
    PatchSet coarse = refine_for_geometry(make_sphere(), 16, adm.eps_g).patches;
    coarse = enforce_admissibility(coarse, adm).patches;
    PatchSet fine = adaptive_upsample(coarse, opts).patches;

    ConstantDensityResult res;
    res.coarse_patches = coarse.size();
    res.fine_patches = fine.size();
    const Discretization disc(std::move(coarse), std::move(fine), opts);
    const std::size_t n = disc.coarse_nodes().size();
    res.nodes = n;
    const DensityField one(1, n, 1.0);
    const auto values = evaluate_at_nodes(KernelFamily::laplace(), Layer::Double, disc, one, {});
    for (double v : values) res.surface_error = std::max(res.surface_error, std::abs(v - 1.0));
    PointCloud center;
    center.push_back(Vec3::Zero());
    const auto c = smooth_potential(KernelFamily::laplace(), Layer::Double, disc.coarse_nodes(), one,
                                    center);
    res.center_error = std::abs(c[0] - 1.0);
    log_line(log, "constant density: " + std::to_string(res.coarse_patches) + " coarse, " +
                      std::to_string(res.fine_patches) + " fine, surface error " +
                      std::to_string(res.surface_error));
    return res;
}

double select_b(double eps_target, int p, double lambda) {
    if (!(eps_target > 0.0 && lambda > 0.0)) throw UsageError("eps_target and lambda must be positive");
    // scan R/rho upward and keep the last value before the error first exceeds the target
    const auto grid = log_grid(1e-3, 1.0, 400);
    double best = 0.0;
    for (double x : grid) {
        const double R = 0.1 * x;
        if (extrapolation_error(p, R, R / p, -0.1) > eps_target) break;
        best = x;
    }
    if (best == 0.0) throw UsageError("no check-point distance reaches the requested accuracy");
    return std::min(best * lambda, 0.9);
}

std::vector<PrecisionRow> run_target_precision_sweep(const PrecisionConfig& config,
                                                     std::ostream* log) {
    const KernelFamily laplace = KernelFamily::laplace();
    Eigen::VectorXd unit(1);
    unit[0] = 1.0;
    const ReferenceSolution ref = ReferenceSolution::single(laplace, Vec3::Zero(), unit);
    const int q_eval = config.eval_q > 0 ? config.eval_q : config.q - 2;
    std::vector<PrecisionRow> rows;
    for (double eps : config.targets) {
        BVProblem problem;
        problem.kernel = laplace;
        problem.data = ref.boundary_condition();
        problem.geometry = builtin_torus(config.torus_major, config.torus_minor);
        problem.degree = config.degree;
        problem.eval.q = config.q;
        problem.eval.p = config.p;
        problem.eval.b = select_b(eps, config.p, config.lambda);
        problem.eval.a = problem.eval.b / config.p;
        problem.eval.eps_target = eps;
        problem.admissibility.eps_g = eps / 10.0;
        problem.admissibility.eps_f = eps / 10.0;
        problem.upsampling.n_skip = config.n_skip;
        problem.dense_operator = true;

        PrecisionRow row;
        row.eps_target = eps;
        row.b = problem.eval.b;
        Solution sol = solve(problem);
        const Discretization& disc = *sol.assembly.disc;
        row.coarse_patches = disc.coarse().size();
        row.fine_patches = disc.fine().size();
        row.iterations = sol.report.iterations;
        row.reports = sol.assembly.reports;

        const auto all = independent_points(disc.coarse(), q_eval);
        const auto subset = stride_subset(all.size(), config.max_targets);
        std::vector<SurfacePoint> points;
        for (std::size_t k : subset) points.push_back(all[k]);
        const auto start = std::chrono::steady_clock::now();
        const auto values = evaluate_on_surface(laplace, Layer::Double, disc, sol.density, points);
        const double elapsed = seconds_since(start);
        double err = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < points.size(); ++k) {
            const double exact =
                ref.value(disc.coarse()[points[k].patch].evaluate(points[k].s, points[k].t))[0];
            err = std::max(err, std::abs(values[k] - exact));
            scale = std::max(scale, std::abs(exact));
        }
        row.achieved = err / scale;
        row.targets_per_second = elapsed > 0.0 ? points.size() / elapsed : 0.0;
        log_line(log, "target precision " + std::to_string(eps) + ": b " + std::to_string(row.b) +
                          ", achieved " + std::to_string(row.achieved) + ", fine patches " +
                          std::to_string(row.fine_patches));
        rows.push_back(row);
    }
    return rows;
}

void write_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
    out << "level,coarse_patches,fine_patches,targets,max_length,error,targets_per_second,"
           "iterations,residual\n";
    for (const auto& r : rows)
        out << r.level << ',' << r.coarse_patches << ',' << r.fine_patches << ',' << r.targets << ','
            << r.max_length << ',' << r.error << ',' << r.targets_per_second << ',' << r.iterations
            << ',' << r.residual << '\n';
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "p,R_over_rho,rp_over_R,log10_relative_error\n";
    for (const auto& r : rows)
        out << r.p << ',' << r.r_over_rho << ',' << r.rp_over_r << ',' << r.log10_error << '\n';
}

void write_csv(std::ostream& out, const ConstantDensityResult& r) {
    out << "coarse_patches,fine_patches,nodes,surface_error,center_error\n";
    out << r.coarse_patches << ',' << r.fine_patches << ',' << r.nodes << ',' << r.surface_error
        << ',' << r.center_error << '\n';
}

void write_csv(std::ostream& out, const std::vector<PrecisionRow>& rows) {
    out << "eps_target,b,achieved,targets_per_second,coarse_patches,fine_patches,iterations\n";
    for (const auto& r : rows)
        out << r.eps_target << ',' << r.b << ',' << r.achieved << ',' << r.targets_per_second << ','
            << r.coarse_patches << ',' << r.fine_patches << ',' << r.iterations << '\n';
}

}  // namespace hedgehog
