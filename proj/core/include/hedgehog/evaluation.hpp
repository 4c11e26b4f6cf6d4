#pragma once

#include "hedgehog/options.hpp"
#include "hedgehog/quadrature.hpp"
#include "hedgehog/spatial.hpp"

#include <memory>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace hedgehog {

/// p + 1 collinear points c_s = y* + sign (R + s r) n(y*), sign = -1 on the interior side.
struct CheckPointSet {
    std::vector<Vec3> points;
    double first_distance = 0.0; ///< R
    double spacing = 0.0;        ///< r
    Vec3 anchor = Vec3::Zero();  ///< y*
    Vec3 normal = Vec3::UnitZ(); ///< n(y*), pointing out of the domain
    Side side = Side::Interior;

    /// Point at distance R + r (p + 1) / 2 from the anchor.
    Vec3 center() const;
};

/// Check points at patch point (s, t) of a patch with characteristic length `length`.
CheckPointSet generate_check_points(const SurfacePatch& patch, double length, double s, double t,
                                    const EvalOptions& opts, Side side);

/// Lagrange basis values l_s(t), s = 0..p, on the equispaced nodes 0, 1, ..., p
/// (first-kind barycentric form).
std::vector<double> extrapolation_weights(int p, double t);

/// Value at t of the degree-p interpolant through (s, values[s]), s = 0..p.
double extrapolate(std::span<const double> values, double t);

/// Node of the quadtree between a coarse patch and its fine descendants. Points outside
/// a node's near-zone box are integrated with the node's own q x q rule, points inside
/// go to its children and, at the bottom, to a fine patch.
struct QuadratureTreeNode {
    enum class Kind { Coarse, Internal, Fine };
    Kind kind = Kind::Coarse;
    std::size_t index = 0;  ///< into the coarse, internal or fine patch set
    std::size_t leaf = 0;   ///< fine patch, for nodes without children
    int first_child = -1;   ///< four consecutive nodes, -1 for leaves
    BoundingBox box;
};

/// Coarse and fine patch sets with their quadrature, the coarse-to-fine upsampler
/// and a closest-point index over the coarse set. Not copyable: the index refers to
/// the owned coarse set.
class Discretization {
public:
    Discretization(PatchSet coarse, PatchSet fine, const EvalOptions& opts);
    Discretization(const Discretization&) = delete;
    Discretization& operator=(const Discretization&) = delete;

    const PatchSet& coarse() const { return coarse_; }
    const PatchSet& fine() const { return fine_; }
    const QuadratureNodeSet& coarse_nodes() const { return coarse_nodes_; }
    const QuadratureNodeSet& fine_nodes() const { return fine_nodes_; }
    const Upsampler& upsampler() const { return upsampler_; }
    const SurfaceIndex& index() const { return *index_; }
    const EvalOptions& options() const { return opts_; }
    /// True when the patches are oriented for an exterior problem (normals flipped).
    bool exterior() const { return exterior_; }
    /// Quadtree nodes; node i < coarse().size() is the root of coarse patch i.
    const std::vector<QuadratureTreeNode>& tree() const { return tree_; }
    /// Patches strictly between the coarse and fine levels, with their nodes and
    /// interpolation from the coarse nodes.
    const PatchSet& internal() const { return internal_; }
    const QuadratureNodeSet& internal_nodes() const { return internal_nodes_; }
    const Upsampler& internal_upsampler() const { return internal_upsampler_; }

private:
    PatchSet coarse_;
    PatchSet fine_;
    EvalOptions opts_;
    QuadratureNodeSet coarse_nodes_;
    QuadratureNodeSet fine_nodes_;
    Upsampler upsampler_;
    std::unique_ptr<SurfaceIndex> index_;
    std::vector<QuadratureTreeNode> tree_;
    PatchSet internal_{PatchRole::Fine};
    QuadratureNodeSet internal_nodes_;
    Upsampler internal_upsampler_;

    void build_tree();
    bool exterior_ = false;
};

enum class Zone { Far, Intermediate, Near };

struct ZoneLabel {
    bool inside = false;
    Zone zone = Zone::Far;
    double winding = 0.0;               ///< generalized winding number of the domain
    std::optional<SurfacePoint> closest; ///< set for Near and Intermediate points
};

/// Classifies targets by the winding number on the coarse nodes, then by distance to
/// the surface: Near when within L of the closest patch, else Intermediate.
std::vector<ZoneLabel> mark_points(const PointCloud& targets, const Discretization& disc,
                                   double eps_target,
                                   const SummationBackend& backend = default_backend());

/// Layer potential at off-surface targets with zone dispatch. Targets outside the
/// domain get 0 and a 0 entry in `inside_mask` (when given).
std::vector<double> evaluate_one_sided(const KernelFamily& kernel, Layer layer,
                                       const Discretization& disc, const DensityField& density,
                                       const PointCloud& targets,
                                       std::span<const ZoneLabel> labels,
                                       const SummationBackend& backend = default_backend(),
                                       std::vector<char>* inside_mask = nullptr);

/// One-sided limit of a layer potential at surface points of the coarse set, with the
/// point itself as anchor. For the double layer on the interior side this is the
/// interior limit (principal value + density / 2).
std::vector<double> evaluate_on_surface(const KernelFamily& kernel, Layer layer,
                                        const Discretization& disc, const DensityField& density,
                                        std::span<const SurfacePoint> points,
                                        Side side = Side::Interior,
                                        const SummationBackend& backend = default_backend());

/// Same at a subset of the coarse nodes (all nodes when `nodes` is empty).
std::vector<double> evaluate_at_nodes(const KernelFamily& kernel, Layer layer,
                                      const Discretization& disc, const DensityField& density,
                                      std::span<const std::size_t> nodes,
                                      Side side = Side::Interior,
                                      const SummationBackend& backend = default_backend());

/// Check points of every coarse node for the on-surface operator and the shared
/// extrapolation weights to the surface. Points are ordered node-major, then side
/// (interior first), then s.
struct SurfaceStencil {
    PointCloud points;
    int sides = 2;
    int per_side = 7;
    std::vector<double> weights; ///< l_s(-b/a), s = 0..p
};

SurfaceStencil surface_stencil(const Discretization& disc, bool two_sided = true);

/// (I/2 + D)[phi] at the coarse nodes: average of the extrapolated interior and
/// exterior limits plus phi / 2.
std::vector<double> evaluate_two_sided(const KernelFamily& kernel, const Discretization& disc,
                                       const DensityField& density,
                                       const SummationBackend& backend = default_backend());

/// Same with a precomputed stencil.
std::vector<double> evaluate_two_sided(const KernelFamily& kernel, const Discretization& disc,
                                       const SurfaceStencil& stencil, const DensityField& density,
                                       const SummationBackend& backend = default_backend());

/// Target points as text lines `x y z`; blank lines and `#` comments are skipped.
PointCloud read_targets(std::istream& in);
/// One line per target: `x y z inside zone v_1 .. v_d`, zone one of far, intermediate, near.
void write_evaluations(std::ostream& out, const PointCloud& targets, std::span<const ZoneLabel> labels,
                       std::span<const double> values, int dim);

}  // namespace hedgehog
