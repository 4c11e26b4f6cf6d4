#pragma once

#include "hedgehog/evaluation.hpp"
#include "hedgehog/refinement.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace hedgehog {

/// Dirichlet problem for u = D[phi] (+ M[phi] for exterior Laplace) on the domain
/// bounded by `geometry`. Side::Exterior flips the mesh and is supported for Laplace.
struct BVProblem {
    KernelFamily kernel;
    Side side = Side::Interior;
    BoundaryCondition data;
    QuadMesh geometry;
    int degree = 8;                 ///< Bezier degree of the fitted patches
    AdmissibilityConfig admissibility;
    UpsamplingConfig upsampling;
    EvalOptions eval;
    bool refine_for_data = true;    ///< run criterion 2 on `data`
    int uniform_levels = -1;        ///< >= 0: uniform upsampling instead of adaptive
    bool dense_operator = false;    ///< assemble the operator once instead of matrix-free products
    double gmres_tolerance = 1e-12;
    int max_iterations = 300;
    /// Point strictly inside the closed surface for the exterior Laplace completion;
    /// found automatically when empty.
    std::optional<Vec3> completion_center;
};

/// Patch sets, quadrature and right-hand side of a problem.
struct Assembly {
    std::unique_ptr<Discretization> disc;
    DensityField rhs;
    std::vector<RefinementReport> reports;
    std::optional<Vec3> completion_center; ///< set for exterior Laplace
};

/// Runs criteria 1, 2, 3 and upsampling, then samples the data at the coarse nodes.
Assembly assemble(const BVProblem& problem);

/// Discretization from an already refined coarse set (criteria 1 to 3 assumed).
Assembly assemble_from_patches(const BVProblem& problem, PatchSet coarse);

/// Discrete operator A = I/2 + D (+ M) on the coarse nodes with two-sided extrapolation.
class BoundaryOperator {
public:
    BoundaryOperator(const KernelFamily& kernel, const Discretization& disc,
                     std::optional<Vec3> completion_center = std::nullopt,
                     const SummationBackend& backend = default_backend());

    std::size_t size() const { return disc_->coarse_nodes().size() * kernel_.dim(); }
    /// y = A x, matrix-free.
    void apply(std::span<const double> x, std::span<double> y) const;
    /// Dense A built row by row: kernel sums at each node's check points folded with
    /// the adjoint of the upsampling.
    Eigen::MatrixXd assemble_dense() const;
    /// Dense A from apply() on unit vectors; for small test cases only.
    Eigen::MatrixXd assemble_columns() const;

private:
    KernelFamily kernel_;
    const Discretization* disc_;
    std::optional<Vec3> center_;
    const SummationBackend* backend_;
    SurfaceStencil stencil_;
};

struct GmresResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0;        ///< final relative residual |b - Ax| / |b|
    std::vector<double> history;  ///< relative residual after each iteration, starting at 1
    bool converged = false;
};

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Unrestarted GMRES from x0 = 0 with modified Gram-Schmidt and Givens rotations.
GmresResult gmres(const LinearMap& apply, std::span<const double> rhs, double tolerance = 1e-12,
                  int max_iterations = 300);

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::size_t coarse_patches = 0;
    std::size_t fine_patches = 0;
    double seconds = 0.0;
    std::vector<double> history;
};

struct Solution {
    Assembly assembly;
    DensityField density;
    SolveReport report;
};

/// Solves A phi = f by GMRES. On non-convergence the best iterate is returned with
/// report.converged = false.
Solution solve(const BVProblem& problem);
/// Same on a prepared assembly.
Solution solve(const BVProblem& problem, Assembly assembly);

/// u = D[phi] (+ M[phi]) at targets with zone marking; entries of targets outside the
/// domain are 0 and flagged 0 in `inside_mask`.
std::vector<double> evaluate_solution(const KernelFamily& kernel, const Assembly& assembly,
                                      const DensityField& density, const PointCloud& targets,
                                      std::vector<char>* inside_mask = nullptr,
                                      const SummationBackend& backend = default_backend());

struct FieldEvaluation {
    std::vector<ZoneLabel> labels;
    std::vector<double> values; ///< node-major, kernel.dim() per target
    std::vector<char> inside;
};

/// evaluate_solution that also returns the zone labels.
FieldEvaluation evaluate_field(const KernelFamily& kernel, const Assembly& assembly,
                               const DensityField& density, const PointCloud& targets,
                               const SummationBackend& backend = default_backend());

}  // namespace hedgehog
