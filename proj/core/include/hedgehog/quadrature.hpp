#pragma once

#include "hedgehog/clenshaw_curtis.hpp"
#include "hedgehog/geometry.hpp"
#include "hedgehog/kernels.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hedgehog {

/// Positions and (optionally) normals in structure-of-arrays layout.
struct PointCloud {
    std::vector<double> x, y, z;
    std::vector<double> nx, ny, nz;

    std::size_t size() const { return x.size(); }
    bool has_normals() const { return nx.size() == x.size(); }
    Vec3 position(std::size_t i) const { return {x[i], y[i], z[i]}; }
    Vec3 normal(std::size_t i) const { return {nx[i], ny[i], nz[i]}; }
    void push_back(const Vec3& p);
    void push_back(const Vec3& p, const Vec3& n);
    void reserve(std::size_t n);
};

PointCloud make_points(std::span<const Vec3> points);

/// Tensor Clenshaw-Curtis nodes of a patch set. Node I = i * q^2 + a * q + b sits on
/// patch i at (s_a, t_b).
struct QuadratureNodeSet {
    int q = 0;
    PointCloud points;          ///< positions and outward normals
    std::vector<double> weight; ///< sqrt(g) * w_a * w_b
    std::vector<int> patch;
    std::vector<double> s, t;

    std::size_t size() const { return weight.size(); }
    std::size_t patch_count() const { return q > 0 ? size() / (q * q) : 0; }
    Vec3 position(std::size_t i) const { return points.position(i); }
    Vec3 normal(std::size_t i) const { return points.normal(i); }
};

QuadratureNodeSet discretize(const PatchSet& set, int q);

/// Node-major samples phi_I in R^dim.
struct DensityField {
    int dim = 1;
    std::vector<double> values;

    DensityField() = default;
    DensityField(int d, std::size_t nodes, double fill = 0.0) : dim(d), values(d * nodes, fill) {}
    std::size_t nodes() const { return dim > 0 ? values.size() / dim : 0; }
};

/// Samples a field at the nodes.
DensityField sample(const QuadratureNodeSet& nodes, const BoundaryCondition& f);

enum class BackendStrategy { Direct, PlugIn };

/// Computes out_i = sum_j K(x_i, y_j) strength_j for a layer kernel. Strengths are
/// weight * density products, node-major. The direct backend is the reference.
class SummationBackend {
public:
    virtual ~SummationBackend() = default;
    virtual BackendStrategy strategy() const = 0;
    virtual std::string name() const = 0;
    /// With `skip_coincident` false a source coinciding with a target throws
    /// DomainError; with true such pairs are dropped.
    virtual void evaluate(const KernelFamily& kernel, Layer layer, const PointCloud& sources,
                          std::span<const double> strengths, const PointCloud& targets,
                          std::span<double> out, bool skip_coincident = false) const = 0;
};

class DirectSummation final : public SummationBackend {
public:
    BackendStrategy strategy() const override { return BackendStrategy::Direct; }
    std::string name() const override { return "direct"; }
    void evaluate(const KernelFamily& kernel, Layer layer, const PointCloud& sources,
                  std::span<const double> strengths, const PointCloud& targets,
                  std::span<double> out, bool skip_coincident = false) const override;
};

/// Shared default backend instance.
const SummationBackend& default_backend();

/// Smooth-quadrature layer potential u(x) = sum_I K(x, y_I) phi_I w_I at the targets.
std::vector<double> smooth_potential(const KernelFamily& kernel, Layer layer,
                                     const QuadratureNodeSet& nodes, const DensityField& density,
                                     const PointCloud& targets,
                                     const SummationBackend& backend = default_backend());

/// weight * density, node-major.
std::vector<double> weighted_strengths(const QuadratureNodeSet& nodes, const DensityField& density);

/// Tensor Chebyshev interpolation of node values from coarse patches to their fine
/// descendants. One pair of q x q matrices per distinct relative placement.
class Upsampler {
public:
    Upsampler() = default;
    Upsampler(const PatchSet& coarse, const PatchSet& fine, int q);

    int q() const { return q_; }
    std::size_t fine_patches() const { return fine_parent_.size(); }
    /// Coarse node values -> fine node values (node-major, `dim` components).
    void apply(std::span<const double> coarse, std::span<double> fine, int dim) const;
    /// Adjoint of apply: accumulates fine values back into coarse slots.
    void apply_transpose(std::span<const double> fine, std::span<double> coarse, int dim) const;
    /// Adjoint restricted to one fine patch; `coarse_block` has q^2 * dim entries for its parent.
    void apply_transpose_patch(std::size_t fine_patch, const double* fine_block,
                               double* coarse_block, int dim) const;
    int parent(std::size_t fine_patch) const { return fine_parent_[fine_patch]; }

private:
    struct Placement {
        std::vector<double> along_s, along_t;  // row-major q x q
    };
    int q_ = 0;
    std::vector<int> fine_parent_;
    std::vector<int> placement_;
    std::vector<Placement> placements_;
};

DensityField upsample_density(const Upsampler& upsampler, const DensityField& coarse);

/// Bound 128 h^{k+1} V / (15 pi k (2q + 1 - k)^k) on the Clenshaw-Curtis error for
/// a near-singular integrand; diagnostic only.
double quadrature_error_heuristic(double h, int k, int q, double variation);

}  // namespace hedgehog
