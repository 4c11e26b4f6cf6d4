#include "hedgehog/spatial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace hedgehog {

namespace {

struct NewtonResult {
    double s, t, distance;
    bool converged;
};

NewtonResult projected_newton(const BezierPatch& patch, const Vec3& x, double s, double t,
                              double eps_opt) {
    constexpr int kMaxIterations = 50;
    PatchHessian h = patch.hessian(s, t);
    Vec3 r = h.position - x;
    double f = r.squaredNorm();
    for (int it = 0; it < kMaxIterations; ++it) {
        const double g[2] = {h.ds.dot(r), h.dt.dot(r)};
        const bool free_s = !((s <= -1.0 && g[0] > 0.0) || (s >= 1.0 && g[0] < 0.0));
        const bool free_t = !((t <= -1.0 && g[1] > 0.0) || (t >= 1.0 && g[1] < 0.0));
        if (!free_s && !free_t) return {s, t, std::sqrt(f), true};

        const double gss = h.ds.dot(h.ds), gst = h.ds.dot(h.dt), gtt = h.dt.dot(h.dt);
        double a00 = gss + h.dss.dot(r), a01 = gst + h.dst.dot(r), a11 = gtt + h.dtt.dot(r);
        double step[2] = {0.0, 0.0};
        if (free_s && free_t) {
            double det = a00 * a11 - a01 * a01;
            if (!(a00 > 0.0 && det > 0.0)) {
                // indefinite Hessian: fall back to the Gauss-Newton matrix
                a00 = gss;
                a01 = gst;
                a11 = gtt;
                det = a00 * a11 - a01 * a01;
                const double reg = 1e-12 * (a00 + a11);
                a00 += reg;
                a11 += reg;
                det = a00 * a11 - a01 * a01;
            }
            step[0] = -(a11 * g[0] - a01 * g[1]) / det;
            step[1] = -(a00 * g[1] - a01 * g[0]) / det;
        } else if (free_s) {
            step[0] = -g[0] / (a00 > 0.0 ? a00 : gss);
        } else {
            step[1] = -g[1] / (a11 > 0.0 ? a11 : gtt);
        }
        const double scale = std::sqrt(gss) + std::sqrt(gtt);
        const double move = (step[0] * h.ds + step[1] * h.dt).norm();

        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
            const double s_new = std::clamp(s + alpha * step[0], -1.0, 1.0);
            const double t_new = std::clamp(t + alpha * step[1], -1.0, 1.0);
            const PatchHessian h_new = patch.hessian(s_new, t_new);
            const Vec3 r_new = h_new.position - x;
            const double f_new = r_new.squaredNorm();
            if (f_new <= f) {
                const double change = (h_new.position - h.position).norm();
                s = s_new;
                t = t_new;
                h = h_new;
                r = r_new;
                f = f_new;
                accepted = true;
                if (change <= eps_opt) return {s, t, std::sqrt(f), true};
                break;
            }
        }
        if (!accepted) {
            // no decrease at roundoff level: stationary if the Newton step is negligible
            const bool stationary = move <= 1e-8 * (std::sqrt(f) + scale);
            return {s, t, std::sqrt(f), stationary};
        }
    }
    return {s, t, std::sqrt(f), false};
}

PatchProjection grid_fallback(const BezierPatch& patch, const Vec3& x) {
    int n = 64;
    double cs = 0.0, ct = 0.0, half = 1.0;
    double best = std::numeric_limits<double>::infinity();
    double bs = 0.0, bt = 0.0;
    for (int round = 0; round < 12; ++round) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double s = std::clamp(cs - half + 2.0 * half * i / (n - 1), -1.0, 1.0);
                const double t = std::clamp(ct - half + 2.0 * half * j / (n - 1), -1.0, 1.0);
                const double d = (patch.evaluate(s, t) - x).norm();
                if (d < best) {
                    best = d;
                    bs = s;
                    bt = t;
                }
            }
        }
        half *= 4.0 / (n - 1);
        cs = bs;
        ct = bt;
        n = 9;
    }
    return {bs, bt, best, true};
}

}  // namespace

PatchProjection closest_point_on_patch(const BezierPatch& patch, const Vec3& x, double eps_opt) {
    if (!(eps_opt > 0.0)) throw UsageError("eps_opt must be positive");
    constexpr int kSeeds = 5;
    constexpr int kStarts = 3;
    std::array<std::pair<double, int>, kSeeds * kSeeds> seeds;
    for (int i = 0; i < kSeeds; ++i)
        for (int j = 0; j < kSeeds; ++j) {
            const double s = -1.0 + 0.5 * i, t = -1.0 + 0.5 * j;
            seeds[i * kSeeds + j] = {(patch.evaluate(s, t) - x).squaredNorm(), i * kSeeds + j};
        }
    std::partial_sort(seeds.begin(), seeds.begin() + kStarts, seeds.end());
    PatchProjection best{0.0, 0.0, std::numeric_limits<double>::infinity(), true};
    bool any_converged = false;
    for (int k = 0; k < kStarts; ++k) {
        const int id = seeds[k].second;
        const NewtonResult r =
            projected_newton(patch, x, -1.0 + 0.5 * (id / kSeeds), -1.0 + 0.5 * (id % kSeeds), eps_opt);
        if (!r.converged) continue;
        any_converged = true;
        if (r.distance < best.distance) best = {r.s, r.t, r.distance, false};
    }
    if (!any_converged) return grid_fallback(patch, x);
    return best;
}

SurfaceIndex::SurfaceIndex(const PatchSet& set, int triangles_per_edge) : set_(&set) {
    if (set.empty()) throw UsageError("closest-point index over an empty patch set");
    triangles_ = AabbTree::build(proxy_triangles(set, triangles_per_edge));
    std::vector<std::pair<BoundingBox, int>> boxes;
    boxes.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i)
        boxes.emplace_back(patch_box(set[i].shape), static_cast<int>(i));
    boxes_ = AabbTree::build(std::move(boxes), PayloadKind::PatchBox);
}

SurfacePoint SurfaceIndex::closest_point(const Vec3& x, double eps_opt) const {
    const auto [tri, tri_distance] = triangles_.nearest_triangle(x);
    (void)tri_distance;
    const int seed_patch = triangles_.triangle(tri).owner;
    const PatchProjection seed = closest_point_on_patch((*set_)[seed_patch].shape, x, eps_opt);
    SurfacePoint best = closest_point_within(x, seed.distance, eps_opt);
    if (best.patch < 0 || seed.distance < best.distance - eps_opt)
        best = {seed_patch, seed.s, seed.t, seed.distance, seed.approximate};
    return best;
}

SurfacePoint SurfaceIndex::closest_point_within(const Vec3& x, double bound, double eps_opt) const {
    const double half = bound * (1.0 + 1e-12) + eps_opt;
    SurfacePoint best;
    best.distance = std::numeric_limits<double>::infinity();
    for (int id : boxes_.query_box(BoundingBox::around(x, half))) {
        const PatchProjection p = closest_point_on_patch((*set_)[id].shape, x, eps_opt);
        // ids arrive ascending, so near-ties keep the lowest id
        if (p.distance < best.distance - eps_opt || best.patch < 0)
            best = {id, p.s, p.t, p.distance, p.approximate};
    }
    return best;
}

}  // namespace hedgehog
