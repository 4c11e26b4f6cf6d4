#pragma once

#include "hedgehog/common.hpp"

#include <cmath>

namespace hedgehog {

/// Which side of the surface a check-point line leaves on. Interior is the side of
/// the problem domain, i.e. against the stored normal.
enum class Side { Interior, Exterior };

inline double side_sign(Side side) { return side == Side::Interior ? -1.0 : 1.0; }

/// Check-point and quadrature parameters shared by refinement and evaluation.
struct EvalOptions {
    int p = 6;            ///< extrapolation order; p + 1 check points
    double a = 0.005;     ///< spacing factor, r = a L
    double b = 0.03;      ///< first-point factor, R = b L
    int q = 20;           ///< Clenshaw-Curtis order per patch direction
    double eps_target = 1e-6;
    bool sqrt_scaling = false; ///< R = b sqrt(L), r = a sqrt(L)

    double length_scale(double L) const { return sqrt_scaling ? std::sqrt(L) : L; }
    /// R: distance of the first check point from the surface.
    double first_distance(double L) const { return b * length_scale(L); }
    /// r: distance between consecutive check points.
    double spacing(double L) const { return a * length_scale(L); }
    /// Distance of the check center from its anchor, R + r (p + 1) / 2.
    double center_distance(double L) const {
        return first_distance(L) + 0.5 * spacing(L) * (p + 1);
    }
    /// Extrapolation coordinate of a point on the surface, -R / r.
    double surface_coordinate() const { return -b / a; }

    void validate() const {
        if (p < 1) throw UsageError("extrapolation order p must be >= 1");
        if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0))
            throw UsageError("spacing factors a and b must lie in (0, 1)");
        if (q < 2) throw UsageError("quadrature order q must be >= 2");
        if (!(eps_target > 0.0)) throw UsageError("eps_target must be positive");
    }
};

}  // namespace hedgehog
