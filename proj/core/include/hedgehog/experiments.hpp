#pragma once

#include "hedgehog/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hedgehog {

/// "builtin:sphere[:radius]", "builtin:spheroid[:equatorial,polar]",
/// "builtin:torus[:major,minor]" or a geometry file path.
QuadMesh load_geometry(const std::string& spec);

/// Built-in shapes used by the experiments; all fit inside the unit ball so charges
/// on the unit sphere lie outside the domain.
QuadMesh builtin_spheroid();
QuadMesh builtin_torus(int n_major = 8, int n_minor = 4);

/// u_c(x) = sum_i G(x, y_i) psi_i, a PDE solution away from the charges y_i.
struct ReferenceSolution {
    KernelFamily kernel;
    std::vector<Vec3> charges;
    std::vector<double> strengths; ///< dim() values per charge

    /// `count` charges uniformly on a sphere, strengths uniform in [0, 1]^dim.
    static ReferenceSolution on_sphere(const KernelFamily& kernel, int count, std::uint64_t seed,
                                       double radius = 1.0, const Vec3& center = Vec3::Zero());
    static ReferenceSolution single(const KernelFamily& kernel, const Vec3& at,
                                    const Eigen::VectorXd& strength);

    Eigen::VectorXd value(const Vec3& x) const;
    /// Normal derivative (Laplace) or traction sigma(u) n (Stokes, elasticity).
    Eigen::VectorXd traction(const Vec3& x, const Vec3& n) const;
    BoundaryCondition boundary_condition() const;
};

struct ExperimentConfig {
    KernelFamily kernel;
    std::string geometry = "builtin:spheroid";
    int levels = 3;
    std::size_t initial_patches = 96; ///< level 0 quadrisects the fitted mesh up to this count
    int degree = 12;
    double eps_g = 1e-10;
    int upsample_levels = 2;
    EvalOptions eval = default_convergence_options();
    std::uint64_t seed = 20240601;
    int charges = 100;
    std::size_t max_targets = 0; ///< 0 = every node; else a stride subsample, divided by 4 per level
    bool dense_operator = true;
    int eval_q = 0;              ///< rule of the independent evaluation nodes; 0 = q - 2

    static EvalOptions default_convergence_options();
};

struct ConvergenceRow {
    int level = 0;
    std::size_t coarse_patches = 0;
    std::size_t fine_patches = 0;
    std::size_t targets = 0;
    double max_length = 0.0;
    double error = 0.0;
    double targets_per_second = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

/// Coarse sets of the convergence study: the fitted mesh quadrisected up to
/// initial_patches, then once more per level.
std::vector<PatchSet> convergence_levels(const ExperimentConfig& config);

/// Relative l-infinity residual of S[du/dn] + D[u] - u at the coarse nodes.
std::vector<ConvergenceRow> run_greens_identity(const ExperimentConfig& config,
                                                std::ostream* log = nullptr);

/// Solve with two-sided products, then evaluate one-sided on an independent node set.
std::vector<ConvergenceRow> run_solver_convergence(const ExperimentConfig& config,
                                                   std::ostream* log = nullptr);

/// Least-squares slope of log(error) against log(length).
double estimated_order(std::span<const double> lengths, std::span<const double> errors);

struct SweepRow {
    int p = 0;
    double r_over_rho = 0.0;  ///< R / |rho|
    double rp_over_r = 0.0;   ///< r p / R
    double log10_error = 0.0;
};

/// Relative error of extrapolating mu(t) = 1 / |t - rho| from t = R + i r, i = 0..p, to 0.
double extrapolation_error(int p, double R, double r, double rho);

std::vector<SweepRow> run_extrapolation_sweep(const std::vector<int>& orders,
                                              const std::vector<double>& r_over_rho,
                                              const std::vector<double>& rp_over_r,
                                              double rho = -0.1);

/// Log-spaced grid of n values in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

struct ConstantDensityResult {
    std::size_t coarse_patches = 0;
    std::size_t fine_patches = 0;
    std::size_t nodes = 0;
    double surface_error = 0.0; ///< max |D[1] - 1| over the nodes, one-sided interior limit
    double center_error = 0.0;  ///< |D[1] - 1| at the center with the coarse rule
};

/// Interior limit of the Laplace double layer of unit density on a sphere.
ConstantDensityResult run_constant_density(int q = 20, double b = 0.15, int p = 6,
                                           std::ostream* log = nullptr);

struct PrecisionConfig {
    std::vector<double> targets = {1e-4, 1e-5, 1e-6};
    int q = 16;
    int p = 6;
    int degree = 10;
    int torus_major = 8;  ///< 8 x 4 quads = 32 coarse patches, unrefined down to eps 1e-7
    int torus_minor = 4;
    double lambda = 0.6;  ///< singularity distance in units of L for choosing b
    int n_skip = 2;
    int eval_q = 0;       ///< 0 = q - 2
    std::size_t max_targets = 2000;
};

struct PrecisionRow {
    double eps_target = 0.0;
    double b = 0.0;
    double achieved = 0.0;
    double targets_per_second = 0.0;
    std::size_t coarse_patches = 0;
    std::size_t fine_patches = 0;
    int iterations = 0;
    std::vector<RefinementReport> reports;
};

/// Largest b with p-point extrapolation error (rp/R = 1) below eps_target, for a
/// singularity at distance lambda L.
double select_b(double eps_target, int p, double lambda);

/// Full pipeline on the torus with a charge in the hole, one row per eps_target.
std::vector<PrecisionRow> run_target_precision_sweep(const PrecisionConfig& config,
                                                     std::ostream* log = nullptr);

void write_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_csv(std::ostream& out, const ConstantDensityResult& result);
void write_csv(std::ostream& out, const std::vector<PrecisionRow>& rows);

}  // namespace hedgehog
