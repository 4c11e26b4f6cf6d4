#pragma once

#include "hedgehog/common.hpp"

#include <numbers>

namespace hedgehog {

enum class Family { Laplace, Stokes, Elasticity };
enum class Layer { Single, Double };

/// PDE family plus its material constants.
struct KernelFamily {
    Family family = Family::Laplace;
    double viscosity = 1.0;      // Stokes
    double poisson_ratio = 0.25; // Elasticity, must lie in (0, 1/2)
    double shear_modulus = 1.0;  // Elasticity

    static KernelFamily laplace() { return {}; }
    static KernelFamily stokes(double viscosity = 1.0);
    static KernelFamily elasticity(double poisson_ratio, double shear_modulus = 1.0);

    /// Number of solution components.
    int dim() const { return family == Family::Laplace ? 1 : 3; }
};

/// Up to 3x3, sized dim() x dim().
using KernelMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

KernelMatrix fundamental_solution(const KernelFamily& kernel, const Vec3& x, const Vec3& y);
KernelMatrix single_layer_kernel(const KernelFamily& kernel, const Vec3& x, const Vec3& y);

/// Normalized so the double layer of a constant density c over a closed surface
/// is c inside, c/2 on the surface (principal value) and 0 outside, with n_y the
/// outward normal.
KernelMatrix double_layer_kernel(const KernelFamily& kernel, const Vec3& x, const Vec3& y,
                                 const Vec3& n_y);

KernelMatrix layer_kernel(const KernelFamily& kernel, Layer layer, const Vec3& x, const Vec3& y,
                          const Vec3& n_y);

namespace detail {

inline constexpr double inv4pi = 0.25 * std::numbers::inv_pi;

// Pointwise accumulation used by the summation loops. d = y - x (source minus
// target), inv_r = 1/|d|; `out += K(x, y) * str` where str has dim() entries.

inline void stokes_single_acc(double scale, const double* d, double inv_r, const double* str,
                              double* out) {
    const double inv_r3 = inv_r * inv_r * inv_r;
    const double ds = d[0] * str[0] + d[1] * str[1] + d[2] * str[2];
    for (int i = 0; i < 3; ++i) out[i] += scale * (str[i] * inv_r + d[i] * ds * inv_r3);
}

inline void stokes_double_acc(const double* d, const double* n, double inv_r, const double* str,
                              double* out) {
    const double inv_r2 = inv_r * inv_r;
    const double inv_r5 = inv_r2 * inv_r2 * inv_r;
    const double dn = d[0] * n[0] + d[1] * n[1] + d[2] * n[2];
    const double ds = d[0] * str[0] + d[1] * str[1] + d[2] * str[2];
    const double c = 3.0 * inv4pi * dn * ds * inv_r5;
    for (int i = 0; i < 3; ++i) out[i] += c * d[i];
}

inline void elasticity_single_acc(double scale, double c34nu, const double* d, double inv_r,
                                  const double* str, double* out) {
    const double inv_r3 = inv_r * inv_r * inv_r;
    const double ds = d[0] * str[0] + d[1] * str[1] + d[2] * str[2];
    for (int i = 0; i < 3; ++i) out[i] += scale * (c34nu * str[i] * inv_r + d[i] * ds * inv_r3);
}

inline void elasticity_double_acc(double scale, double c12nu, const double* d, const double* n,
                                  double inv_r, const double* str, double* out) {
    // scale = 1/(8 pi (1 - nu)), c12nu = 1 - 2 nu
    const double inv_r2 = inv_r * inv_r;
    const double dn = (d[0] * n[0] + d[1] * n[1] + d[2] * n[2]) * inv_r;
    const double ds = (d[0] * str[0] + d[1] * str[1] + d[2] * str[2]) * inv_r;
    const double ns = n[0] * str[0] + n[1] * str[1] + n[2] * str[2];
    for (int i = 0; i < 3; ++i) {
        const double di = d[i] * inv_r;
        const double sym = dn * (c12nu * str[i] + 3.0 * di * ds);
        const double skew = c12nu * (di * ns - n[i] * ds);
        out[i] += scale * inv_r2 * (sym - skew);
    }
}

}  // namespace detail

}  // namespace hedgehog
