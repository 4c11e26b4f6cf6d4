#include "hedgehog/geometry.hpp"

#include <cmath>
#include <numbers>

namespace hedgehog {

namespace {

struct CubeFace {
    Vec3 e1, e2, e3;  // e1 x e2 = e3 (outward)
};

const std::array<CubeFace, 6>& cube_faces() {
    static const std::array<CubeFace, 6> faces = {{
        {Vec3::UnitY(), Vec3::UnitZ(), Vec3::UnitX()},
        {Vec3::UnitZ(), Vec3::UnitY(), -Vec3::UnitX()},
        {Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()},
        {Vec3::UnitX(), Vec3::UnitZ(), -Vec3::UnitY()},
        {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()},
        {Vec3::UnitY(), Vec3::UnitX(), -Vec3::UnitZ()},
    }};
    return faces;
}

// Unit-sphere point of a cube face plus its partials, equal-angle parametrization.
struct SpherePoint {
    Vec3 p, du, dv;
};

SpherePoint cube_sphere(const CubeFace& f, double u, double v) {
    constexpr double k = 0.25 * std::numbers::pi;
    const double tu = std::tan(k * u), tv = std::tan(k * v);
    const Vec3 w = tu * f.e1 + tv * f.e2 + f.e3;
    const double len = w.norm();
    const Vec3 p = w / len;
    const Vec3 wu = k * (1.0 + tu * tu) * f.e1;
    const Vec3 wv = k * (1.0 + tv * tv) * f.e2;
    const auto project = [&](const Vec3& dw) { return (dw - p * p.dot(dw)) / len; };
    return {p, project(wu), project(wv)};
}

}  // namespace

QuadMesh make_spheroid(double equatorial, double polar, const Vec3& center) {
    if (!(equatorial > 0.0 && polar > 0.0)) throw UsageError("spheroid axes must be positive");
    const Vec3 axes(equatorial, equatorial, polar);
    QuadMesh mesh;
    for (const CubeFace& face : cube_faces()) {
        Embedding e;
        e.map = [face, axes, center](double u, double v) {
            return Vec3(center + axes.cwiseProduct(cube_sphere(face, u, v).p));
        };
        e.jacobian = [face, axes](double u, double v) {
            const SpherePoint sp = cube_sphere(face, u, v);
            return std::make_pair(Vec3(axes.cwiseProduct(sp.du)), Vec3(axes.cwiseProduct(sp.dv)));
        };
        mesh.quads.push_back(std::move(e));
    }
    mesh.build_links();
    return mesh;
}

QuadMesh make_sphere(double radius, const Vec3& center) {
    return make_spheroid(radius, radius, center);
}

QuadMesh make_torus(double major_radius, double minor_radius, int n_major, int n_minor) {
    if (!(major_radius > minor_radius && minor_radius > 0.0))
        throw UsageError("torus needs major radius > minor radius > 0");
    if (n_major < 3 || n_minor < 3) throw UsageError("torus needs at least 3 x 3 quads");
    QuadMesh mesh;
    const double dtheta = 2.0 * std::numbers::pi / n_major;
    const double dphi = 2.0 * std::numbers::pi / n_minor;
    for (int i = 0; i < n_major; ++i) {
        for (int j = 0; j < n_minor; ++j) {
            const double theta0 = i * dtheta, phi0 = j * dphi;
            const double R = major_radius, r = minor_radius;
            Embedding e;
            e.map = [=](double u, double v) {
                const double th = theta0 + 0.5 * (u + 1.0) * dtheta;
                const double ph = phi0 + 0.5 * (v + 1.0) * dphi;
                const double rho = R + r * std::cos(ph);
                return Vec3(rho * std::cos(th), rho * std::sin(th), r * std::sin(ph));
            };
            e.jacobian = [=](double u, double v) {
                const double th = theta0 + 0.5 * (u + 1.0) * dtheta;
                const double ph = phi0 + 0.5 * (v + 1.0) * dphi;
                const double rho = R + r * std::cos(ph);
                const Vec3 d_th(-rho * std::sin(th), rho * std::cos(th), 0.0);
                const Vec3 d_ph(-r * std::sin(ph) * std::cos(th), -r * std::sin(ph) * std::sin(th),
                                r * std::cos(ph));
                return std::make_pair(Vec3(0.5 * dtheta * d_th), Vec3(0.5 * dphi * d_ph));
            };
            mesh.quads.push_back(std::move(e));
        }
    }
    mesh.build_links(1e-9);
    return mesh;
}

QuadMesh make_flat_rectangle(double x0, double y0, double w, double h, double z, bool up) {
    QuadMesh mesh;
    Embedding e;
    e.map = [=](double u, double v) {
        return Vec3(x0 + 0.5 * (u + 1.0) * w, y0 + 0.5 * (v + 1.0) * h, z);
    };
    e.jacobian = [=](double, double) {
        return std::make_pair(Vec3(0.5 * w, 0.0, 0.0), Vec3(0.0, 0.5 * h, 0.0));
    };
    mesh.quads.push_back(std::move(e));
    mesh.orientation = up ? 1 : -1;
    return mesh;
}

}  // namespace hedgehog
