#pragma once

#include "hedgehog/common.hpp"

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace hedgehog {

/// Bernstein basis of degree n on [-1, 1], i.e. the classical basis in u = (s + 1) / 2.
/// Index l = 0 is the basis function that equals 1 at s = -1.
void bernstein_basis(int n, double s, double* values);
/// Values, first and second s-derivatives (any of the outputs may be null).
void bernstein_basis_derivs(int n, double s, double* values, double* d1, double* d2);

/// Affine map eta(s, t) = center + half * (s, t) from [-1,1]^2 onto a dyadic square
/// of the root parameter domain.
struct Subdomain {
    double cs = 0.0;
    double ct = 0.0;
    double half = 1.0;

    std::array<double, 2> map(double s, double t) const { return {cs + half * s, ct + half * t}; }
    /// Quadrant k: bit 0 selects the upper half in s, bit 1 the upper half in t.
    Subdomain child(int k) const;
    /// Local coordinates of a point of `this` expressed in the coordinates of `ancestor`.
    std::array<double, 2> relative_to(const Subdomain& ancestor, double s, double t) const;
    bool operator==(const Subdomain&) const = default;
};

struct PatchFrame {
    Vec3 position;
    Vec3 ds;
    Vec3 dt;
};

struct PatchHessian {
    Vec3 position;
    Vec3 ds, dt;
    Vec3 dss, dst, dtt;
};

/// Tensor-product Bezier patch of bidegree (n, n) over [-1, 1]^2.
class BezierPatch {
public:
    BezierPatch() = default;
    /// Control points a_lm stored at index l * (n + 1) + m; l runs along s.
    BezierPatch(int degree, std::vector<Vec3> control_points);

    int degree() const { return degree_; }
    const std::vector<Vec3>& control_points() const { return ctrl_; }
    const Vec3& control_point(int l, int m) const { return ctrl_[l * (degree_ + 1) + m]; }

    Vec3 evaluate(double s, double t) const;
    PatchFrame frame(double s, double t) const;
    PatchHessian hessian(double s, double t) const;

    /// Exact de Casteljau subdivision at s = 0 and t = 0, children ordered as Subdomain::child.
    std::array<BezierPatch, 4> quadrisect() const;

    /// Tensor grid evaluation: positions and first partials at all (s_i, t_j), index i * nt + j.
    void sample_grid(std::span<const double> s, std::span<const double> t, std::vector<Vec3>& pos,
                     std::vector<Vec3>* ds = nullptr, std::vector<Vec3>* dt = nullptr) const;

private:
    int degree_ = 0;
    std::vector<Vec3> ctrl_;
};

/// A Bezier patch with its quadtree lineage inside a root quad of the mesh.
struct SurfacePatch {
    BezierPatch shape;
    int root = 0;
    Subdomain domain;
    int depth = 0;
    int orientation = 1; ///< +1 when ds x dt points into the exterior

    Vec3 evaluate(double s, double t) const { return shape.evaluate(s, t); }
    std::array<SurfacePatch, 4> quadrisect() const;
};

PatchFrame derivatives(const SurfacePatch& patch, double s, double t);
/// Unit normal pointing into the exterior; throws SingularParametrization on a
/// vanishing Jacobian.
Vec3 normal(const SurfacePatch& patch, double s, double t);
/// |dP/ds x dP/dt|^2; the area element is its square root.
double metric_det(const SurfacePatch& patch, double s, double t);

/// sqrt(area) using the q x q Clenshaw-Curtis rule.
double characteristic_length(const SurfacePatch& patch, int q = 20);

/// Analytic map gamma_r from [-1,1]^2 to R^3 with optional Jacobian.
struct Embedding {
    std::function<Vec3(double, double)> map;
    /// Returns (d gamma/du, d gamma/dv); central differences are used when empty.
    std::function<std::pair<Vec3, Vec3>(double, double)> jacobian;

    std::pair<Vec3, Vec3> partials(double u, double v) const;
};

/// Embedding that evaluates a Bezier patch.
Embedding bezier_embedding(BezierPatch patch);

/// Adjacency between two quads: the number of shared corners (1 = vertex, 2 = edge).
struct QuadLink {
    int a = 0;
    int b = 0;
    int shared_corners = 0;
};

struct QuadMesh {
    std::vector<Embedding> quads;
    int orientation = 1;
    std::vector<QuadLink> links;

    std::size_t size() const { return quads.size(); }
    /// Recomputes `links` by matching quad corners within `tol`, and throws UsageError
    /// if two quads share three or more corners.
    void build_links(double tol = 1e-10);
    /// Mesh with all normals flipped (used for exterior problems).
    QuadMesh flipped() const;
};

struct FitResult {
    SurfacePatch patch;
    double error = 0.0; ///< max of position and first-partial errors on the validation grid
};

/// Least-squares bidegree-(n, n) fit of gamma on `domain` from a 4n x 4n Chebyshev
/// sample grid; the error is measured on an 8n x 8n grid (endpoints included).
FitResult fit_patch(const Embedding& gamma, const Subdomain& domain, int n, int root = 0,
                    int depth = 0, int orientation = 1);

/// Error of an existing patch against gamma on the validation grid.
double fit_error(const Embedding& gamma, const SurfacePatch& patch);

enum class PatchRole { Coarse, Fine };

/// Ordered patches with cached characteristic lengths. For fine sets `parent(i)`
/// is the index of the coarse ancestor in the coarse set.
class PatchSet {
public:
    explicit PatchSet(PatchRole role = PatchRole::Coarse) : role_(role) {}

    void add(SurfacePatch patch, int parent = -1);
    std::size_t size() const { return patches_.size(); }
    bool empty() const { return patches_.empty(); }
    const SurfacePatch& operator[](std::size_t i) const { return patches_[i]; }
    const std::vector<SurfacePatch>& patches() const { return patches_; }
    double length(std::size_t i) const { return lengths_[i]; }
    const std::vector<double>& lengths() const { return lengths_; }
    int parent(std::size_t i) const { return parents_[i]; }
    bool has_lineage() const;
    PatchRole role() const { return role_; }
    double max_length() const;
    double min_length() const;
    int max_depth() const;

private:
    PatchRole role_;
    std::vector<SurfacePatch> patches_;
    std::vector<double> lengths_;
    std::vector<int> parents_;
};

/// Every patch quadrisected exactly once (role preserved, lineage composed).
PatchSet quadrisect_all(const PatchSet& set);

/// Scalar or vector field given on R^3, e.g. Dirichlet data.
struct BoundaryCondition {
    std::function<Eigen::VectorXd(const Vec3&)> evaluator;
    int dim = 1;
    int smoothness = 0;

    Eigen::VectorXd operator()(const Vec3& x) const { return evaluator(x); }
};

// Built-in analytic surfaces. All normals point outward with orientation +1.

/// Six-face cube-to-sphere map with equal-angle face parametrization.
QuadMesh make_sphere(double radius = 1.0, const Vec3& center = Vec3::Zero());
/// Spheroid with semi-axes (equatorial, equatorial, polar).
QuadMesh make_spheroid(double equatorial, double polar, const Vec3& center = Vec3::Zero());
/// Torus around the z axis split into n_major x n_minor angular quads.
QuadMesh make_torus(double major_radius, double minor_radius, int n_major = 8, int n_minor = 4);
/// Single flat rectangle [x0, x0 + w] x [y0, y0 + h] at height z with normal sign `up`.
QuadMesh make_flat_rectangle(double x0, double y0, double w, double h, double z, bool up = true);

/// Patches fitted exactly from polynomial (Bezier) embeddings at depth 0.
PatchSet patches_from_bezier(const std::vector<BezierPatch>& patches, int orientation = 1);

// Geometry file: "degree n", "quads R", then R (n+1)^2 lines "r l m x y z".
std::vector<BezierPatch> read_geometry(std::istream& in);
std::vector<BezierPatch> read_geometry_file(const std::string& path);
void write_geometry(std::ostream& out, const std::vector<BezierPatch>& patches);
/// Writes the leaf patches of a set (each exported as its own quad).
void write_geometry(std::ostream& out, const PatchSet& set);

}  // namespace hedgehog
