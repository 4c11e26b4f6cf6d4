#include "hedgehog/kernels.hpp"

#include <cmath>

namespace hedgehog {

KernelFamily KernelFamily::stokes(double viscosity) {
    if (!(viscosity > 0.0)) throw UsageError("viscosity must be positive");
    KernelFamily k;
    k.family = Family::Stokes;
    k.viscosity = viscosity;
    return k;
}

KernelFamily KernelFamily::elasticity(double poisson_ratio, double shear_modulus) {
    if (!(poisson_ratio > 0.0 && poisson_ratio < 0.5))
        throw UsageError("Poisson ratio must lie in (0, 1/2)");
    if (!(shear_modulus > 0.0)) throw UsageError("shear modulus must be positive");
    KernelFamily k;
    k.family = Family::Elasticity;
    k.poisson_ratio = poisson_ratio;
    k.shear_modulus = shear_modulus;
    return k;
}

namespace {

double checked_inverse_distance(const Vec3& d) {
    const double r = d.norm();
    if (r == 0.0) throw DomainError("kernel evaluated at coincident points");
    return 1.0 / r;
}

}  // namespace

KernelMatrix fundamental_solution(const KernelFamily& kernel, const Vec3& x, const Vec3& y) {
    const Vec3 d = y - x;
    const double inv_r = checked_inverse_distance(d);
    const double inv_r3 = inv_r * inv_r * inv_r;
    switch (kernel.family) {
        case Family::Laplace: {
            KernelMatrix m(1, 1);
            m(0, 0) = detail::inv4pi * inv_r;
            return m;
        }
        case Family::Stokes: {
            const double c = 0.5 * detail::inv4pi / kernel.viscosity;
            KernelMatrix m = c * (Mat3::Identity() * inv_r + d * d.transpose() * inv_r3);
            return m;
        }
        case Family::Elasticity: {
            const double nu = kernel.poisson_ratio;
            const double c = 0.25 * detail::inv4pi / (kernel.shear_modulus * (1.0 - nu));
            KernelMatrix m =
                c * ((3.0 - 4.0 * nu) * Mat3::Identity() * inv_r + d * d.transpose() * inv_r3);
            return m;
        }
    }
    throw UsageError("unknown kernel family");
}

KernelMatrix single_layer_kernel(const KernelFamily& kernel, const Vec3& x, const Vec3& y) {
    return fundamental_solution(kernel, x, y);
}

KernelMatrix double_layer_kernel(const KernelFamily& kernel, const Vec3& x, const Vec3& y,
                                 const Vec3& n_y) {
    const Vec3 d = y - x;
    const double inv_r = checked_inverse_distance(d);
    switch (kernel.family) {
        case Family::Laplace: {
            KernelMatrix m(1, 1);
            m(0, 0) = detail::inv4pi * d.dot(n_y) * inv_r * inv_r * inv_r;
            return m;
        }
        case Family::Stokes:
        case Family::Elasticity: {
            KernelMatrix m(3, 3);
            for (int j = 0; j < 3; ++j) {
                double e[3] = {0.0, 0.0, 0.0};
                e[j] = 1.0;
                double col[3] = {0.0, 0.0, 0.0};
                if (kernel.family == Family::Stokes) {
                    detail::stokes_double_acc(d.data(), n_y.data(), inv_r, e, col);
                } else {
                    const double nu = kernel.poisson_ratio;
                    detail::elasticity_double_acc(0.5 * detail::inv4pi / (1.0 - nu), 1.0 - 2.0 * nu,
                                                  d.data(), n_y.data(), inv_r, e, col);
                }
                for (int i = 0; i < 3; ++i) m(i, j) = col[i];
            }
            return m;
        }
    }
    throw UsageError("unknown kernel family");
}

KernelMatrix layer_kernel(const KernelFamily& kernel, Layer layer, const Vec3& x, const Vec3& y,
                          const Vec3& n_y) {
    return layer == Layer::Single ? single_layer_kernel(kernel, x, y)
                                  : double_layer_kernel(kernel, x, y, n_y);
}

}  // namespace hedgehog
