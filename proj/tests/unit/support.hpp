#pragma once

#include "hedgehog/experiments.hpp"

#include <doctest.h>

#include <random>

namespace hedgehog::test {

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    return Vec3(g(rng), g(rng), g(rng)).normalized();
}

inline Vec3 random_in_box(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    return Vec3(u(rng), u(rng), u(rng));
}

/// Bicubic-ish non-planar Bezier patch with a gentle bump, used where a generic
/// curved patch is needed.
inline BezierPatch bumpy_patch(int n = 3, double amplitude = 0.2, double shift = 0.0) {
    std::vector<Vec3> ctrl;
    for (int l = 0; l <= n; ++l)
        for (int m = 0; m <= n; ++m) {
            const double s = -1.0 + 2.0 * l / n, t = -1.0 + 2.0 * m / n;
            ctrl.emplace_back(s, t, amplitude * (1.0 - s * s) * (1.0 + 0.5 * t) + shift);
        }
    return BezierPatch(n, ctrl);
}

/// Fitted patches of a built-in mesh.
inline PatchSet fitted(const QuadMesh& mesh, int degree = 10, double eps_g = 1e-6) {
    return refine_for_geometry(mesh, degree, eps_g).patches;
}

}  // namespace hedgehog::test
