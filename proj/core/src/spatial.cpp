#include "hedgehog/spatial.hpp"

#include <algorithm>
#include <cmath>

namespace hedgehog {

BoundingBox BoundingBox::around(const Vec3& c, double half_width) {
    return {c.array() - half_width, c.array() + half_width};
}

void BoundingBox::expand(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
}

void BoundingBox::expand(const BoundingBox& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
}

bool BoundingBox::contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

bool BoundingBox::contains(const BoundingBox& b) const {
    return (b.lo.array() >= lo.array()).all() && (b.hi.array() <= hi.array()).all();
}

bool BoundingBox::intersects(const BoundingBox& b) const {
    return (b.lo.array() <= hi.array()).all() && (lo.array() <= b.hi.array()).all();
}

BoundingBox BoundingBox::inflated(double d) const { return {lo.array() - d, hi.array() + d}; }

double BoundingBox::squared_distance(const Vec3& p) const {
    const Vec3 below = (lo - p).cwiseMax(0.0);
    const Vec3 above = (p - hi).cwiseMax(0.0);
    return (below + above).squaredNorm();
}

BoundingBox patch_box(const BezierPatch& patch) {
    BoundingBox b;
    for (const Vec3& a : patch.control_points()) b.expand(a);
    return b;
}

BoundingBox near_zone_box(const SurfacePatch& patch, double length) {
    return patch_box(patch.shape).inflated(2.0 * length);
}

Vec3 closest_point_on_triangle(const Triangle& tri, const Vec3& p) {
    const Vec3 ab = tri.b - tri.a, ac = tri.c - tri.a, ap = p - tri.a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return tri.a;
    const Vec3 bp = p - tri.b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return tri.b;
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return tri.a + (d1 / (d1 - d3)) * ab;
    const Vec3 cp = p - tri.c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return tri.c;
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return tri.a + (d2 / (d2 - d6)) * ac;
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return tri.b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (tri.c - tri.b);
    const double denom = 1.0 / (va + vb + vc);
    return tri.a + ab * (vb * denom) + ac * (vc * denom);
}

std::vector<Triangle> proxy_triangles(const PatchSet& set, int k) {
    if (k < 1) throw UsageError("proxy triangulation needs k >= 1");
    std::vector<double> grid(k + 1);
    for (int i = 0; i <= k; ++i) grid[i] = -1.0 + 2.0 * i / k;
    std::vector<Triangle> tris;
    tris.reserve(set.size() * 2 * k * k);
    std::vector<Vec3> pos;
    for (std::size_t id = 0; id < set.size(); ++id) {
        set[id].shape.sample_grid(grid, grid, pos);
        const int owner = static_cast<int>(id);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                const Vec3& p00 = pos[i * (k + 1) + j];
                const Vec3& p10 = pos[(i + 1) * (k + 1) + j];
                const Vec3& p01 = pos[i * (k + 1) + j + 1];
                const Vec3& p11 = pos[(i + 1) * (k + 1) + j + 1];
                tris.push_back({p00, p10, p11, owner});
                tris.push_back({p00, p11, p01, owner});
            }
    }
    return tris;
}

AabbTree AabbTree::build(std::vector<std::pair<BoundingBox, int>> items, PayloadKind kind) {
    if (items.empty()) throw UsageError("AABB tree needs at least one item");
    for (const auto& [box, id] : items)
        if (!box.valid()) throw UsageError("invalid bounding box");
    AabbTree tree;
    tree.kind_ = kind;
    tree.items_ = std::move(items);
    tree.nodes_.reserve(2 * tree.items_.size());
    tree.build_range(0, static_cast<int>(tree.items_.size()));
    return tree;
}

AabbTree AabbTree::build(std::vector<Triangle> triangles) {
    if (triangles.empty()) throw UsageError("AABB tree needs at least one triangle");
    std::vector<std::pair<BoundingBox, int>> items;
    items.reserve(triangles.size());
    for (std::size_t i = 0; i < triangles.size(); ++i) {
        BoundingBox b;
        b.expand(triangles[i].a);
        b.expand(triangles[i].b);
        b.expand(triangles[i].c);
        items.emplace_back(b, static_cast<int>(i));
    }
    AabbTree tree = build(std::move(items), PayloadKind::ProxyTriangle);
    tree.triangles_ = std::move(triangles);
    return tree;
}

int AabbTree::build_range(int first, int count) {
    constexpr int kLeafSize = 4;
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    BoundingBox box, centers;
    for (int i = first; i < first + count; ++i) {
        box.expand(items_[i].first);
        centers.expand(items_[i].first.center());
    }
    nodes_[index].box = box;
    if (count <= kLeafSize) {
        nodes_[index].first = first;
        nodes_[index].count = count;
        return index;
    }
    int axis = 0;
    const Vec3 extent = centers.hi - centers.lo;
    if (extent.y() > extent[axis]) axis = 1;
    if (extent.z() > extent[axis]) axis = 2;
    const int mid = first + count / 2;
    std::nth_element(items_.begin() + first, items_.begin() + mid, items_.begin() + first + count,
                     [axis](const auto& a, const auto& b) {
                         const double ca = a.first.lo[axis] + a.first.hi[axis];
                         const double cb = b.first.lo[axis] + b.first.hi[axis];
                         return ca < cb || (ca == cb && a.second < b.second);
                     });
    const int left = build_range(first, mid - first);
    const int right = build_range(mid, first + count - mid);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

std::vector<int> AabbTree::query_point(const Vec3& x) const {
    std::vector<int> out;
    if (nodes_.empty()) return out;
    int stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (!node.box.contains(x)) continue;
        if (node.left < 0) {
            for (int i = node.first; i < node.first + node.count; ++i)
                if (items_[i].first.contains(x)) out.push_back(items_[i].second);
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> AabbTree::query_box(const BoundingBox& box) const {
    std::vector<int> out;
    if (nodes_.empty()) return out;
    int stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (!node.box.intersects(box)) continue;
        if (node.left < 0) {
            for (int i = node.first; i < node.first + node.count; ++i)
                if (items_[i].first.intersects(box)) out.push_back(items_[i].second);
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::pair<int, double> AabbTree::nearest_triangle(const Vec3& x) const {
    if (kind_ != PayloadKind::ProxyTriangle)
        throw UsageError("nearest_triangle requires a triangle tree");
    double best2 = std::numeric_limits<double>::infinity();
    int best = -1;
    std::pair<double, int> stack[128];
    int top = 0;
    stack[top++] = {nodes_[0].box.squared_distance(x), 0};
    while (top > 0) {
        const auto [bound, index] = stack[--top];
        if (bound > best2) continue;
        const Node& node = nodes_[index];
        if (node.left < 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                const int id = items_[i].second;
                const double d2 = (closest_point_on_triangle(triangles_[id], x) - x).squaredNorm();
                if (d2 < best2 || (d2 == best2 && id < best)) {
                    best2 = d2;
                    best = id;
                }
            }
            continue;
        }
        const double dl = nodes_[node.left].box.squared_distance(x);
        const double dr = nodes_[node.right].box.squared_distance(x);
        // push the farther child first so the nearer one is visited next
        if (dl <= dr) {
            stack[top++] = {dr, node.right};
            stack[top++] = {dl, node.left};
        } else {
            stack[top++] = {dl, node.left};
            stack[top++] = {dr, node.right};
        }
    }
    return {best, std::sqrt(best2)};
}

bool AabbTree::check_invariants() const {
    if (nodes_.empty()) return items_.empty();
    std::vector<int> hits(items_.size(), 0);
    for (const Node& node : nodes_) {
        if (node.left < 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                ++hits[i];
                if (!node.box.contains(items_[i].first)) return false;
            }
        } else {
            if (!node.box.contains(nodes_[node.left].box)) return false;
            if (!node.box.contains(nodes_[node.right].box)) return false;
        }
    }
    return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

}  // namespace hedgehog
