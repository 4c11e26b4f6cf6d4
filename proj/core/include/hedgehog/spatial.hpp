#pragma once

#include "hedgehog/geometry.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace hedgehog {

struct BoundingBox {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

    static BoundingBox around(const Vec3& c, double half_width);
    bool valid() const { return (lo.array() <= hi.array()).all(); }
    void expand(const Vec3& p);
    void expand(const BoundingBox& b);
    bool contains(const Vec3& p) const;
    bool contains(const BoundingBox& b) const;
    bool intersects(const BoundingBox& b) const;
    BoundingBox inflated(double d) const;
    double squared_distance(const Vec3& p) const;
    Vec3 center() const { return 0.5 * (lo + hi); }
};

/// Hull of the control points, which contains the patch.
BoundingBox patch_box(const BezierPatch& patch);
/// Patch box inflated by 2 L on every side; contains all points within L of the patch.
BoundingBox near_zone_box(const SurfacePatch& patch, double length);

struct Triangle {
    Vec3 a, b, c;
    int owner = -1;  ///< patch id the proxy belongs to
};

/// Closest point on a triangle (region-based projection).
Vec3 closest_point_on_triangle(const Triangle& tri, const Vec3& p);

/// Proxy triangulation of each patch from a (k+1) x (k+1) sample grid.
std::vector<Triangle> proxy_triangles(const PatchSet& set, int k = 8);

enum class PayloadKind { PatchBox, NearZoneBox, ProxyTriangle };

/// Median-split bounding volume hierarchy. Results of the queries are exactly the
/// brute-force answer sets; ids are returned sorted ascending.
class AabbTree {
public:
    AabbTree() = default;
    static AabbTree build(std::vector<std::pair<BoundingBox, int>> items,
                          PayloadKind kind = PayloadKind::PatchBox);
    static AabbTree build(std::vector<Triangle> triangles);

    std::vector<int> query_point(const Vec3& x) const;
    std::vector<int> query_box(const BoundingBox& box) const;
    /// (payload id, distance) of the nearest stored triangle.
    std::pair<int, double> nearest_triangle(const Vec3& x) const;

    PayloadKind kind() const { return kind_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    const BoundingBox& bounds() const { return nodes_.front().box; }
    const Triangle& triangle(std::size_t id) const { return triangles_[id]; }
    /// Structural checks used by the tests.
    bool check_invariants() const;

private:
    struct Node {
        BoundingBox box;
        int left = -1, right = -1;
        int first = 0, count = 0;
    };
    int build_range(int first, int count);

    PayloadKind kind_ = PayloadKind::PatchBox;
    std::vector<Node> nodes_;
    std::vector<std::pair<BoundingBox, int>> items_;
    std::vector<Triangle> triangles_;  // indexed by payload id
};

struct PatchProjection {
    double s = 0.0, t = 0.0;
    double distance = 0.0;
    bool approximate = false;  ///< Newton failed; grid fallback used
};

/// Local minimizer of |P(s,t) - x| over [-1,1]^2 by projected Newton started from the
/// best points of a 5 x 5 grid, with a 64 x 64 grid refinement fallback.
PatchProjection closest_point_on_patch(const BezierPatch& patch, const Vec3& x,
                                       double eps_opt = 1e-14);

struct SurfacePoint {
    int patch = -1;
    double s = 0.0, t = 0.0;
    double distance = 0.0;
    bool approximate = false;
};

/// Trees over a patch set for global closest-point queries.
class SurfaceIndex {
public:
    explicit SurfaceIndex(const PatchSet& set, int triangles_per_edge = 8);

    /// Closest point on the whole surface: nearest proxy triangle, Newton on its patch,
    /// then the argmin over all patches whose boxes meet the cube of that half-width.
    SurfacePoint closest_point(const Vec3& x, double eps_opt = 1e-14) const;
    /// Same gather-and-argmin step with a caller-supplied initial distance bound.
    SurfacePoint closest_point_within(const Vec3& x, double bound, double eps_opt = 1e-14) const;

    const PatchSet& patches() const { return *set_; }
    const AabbTree& box_tree() const { return boxes_; }

private:
    const PatchSet* set_;
    AabbTree triangles_;
    AabbTree boxes_;
};

}  // namespace hedgehog
