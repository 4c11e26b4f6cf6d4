#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace hedgehog;
using namespace hedgehog::test;

namespace {

const double kPi = std::numbers::pi;

// Closed forms written out independently of the library.
Mat3 stokeslet(const Vec3& r, double mu) {
    const double rho = r.norm();
    return (Mat3::Identity() / rho + r * r.transpose() / (rho * rho * rho)) / (8.0 * kPi * mu);
}

Mat3 kelvin(const Vec3& r, double mu, double nu) {
    const double rho = r.norm();
    return ((3.0 - 4.0 * nu) * Mat3::Identity() / rho + r * r.transpose() / (rho * rho * rho)) /
           (16.0 * kPi * mu * (1.0 - nu));
}

// u(x) = G(x, y) psi, differentiated by central differences.
Eigen::VectorXd field(const KernelFamily& k, const Vec3& x, const Vec3& y, const Eigen::VectorXd& psi) {
    return fundamental_solution(k, x, y) * psi;
}

Eigen::VectorXd laplacian_fd(const KernelFamily& k, const Vec3& x, const Vec3& y,
                             const Eigen::VectorXd& psi, double h) {
    Eigen::VectorXd lap = -6.0 * field(k, x, y, psi);
    for (int a = 0; a < 3; ++a) {
        Vec3 e = Vec3::Zero();
        e[a] = h;
        lap += field(k, x + e, y, psi) + field(k, x - e, y, psi);
    }
    return lap / (h * h);
}

double divergence_fd(const KernelFamily& k, const Vec3& x, const Vec3& y, const Eigen::VectorXd& psi,
                     double h) {
    double div = 0.0;
    for (int a = 0; a < 3; ++a) {
        Vec3 e = Vec3::Zero();
        e[a] = h;
        div += (field(k, x + e, y, psi)[a] - field(k, x - e, y, psi)[a]) / (2.0 * h);
    }
    return div;
}

// Closed sphere discretization for smooth quadrature far from the surface.
QuadratureNodeSet sphere_nodes(double radius, int q) {
    PatchSet set = fitted(make_sphere(radius), 12, 1e-10);
    set = quadrisect_all(set);
    return discretize(set, q);
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("laplace fundamental solution matches 1/(4 pi r)") {
    const Vec3 x(0.1, -0.2, 0.3), y(1.0, 0.5, -0.4);
    const auto G = fundamental_solution(KernelFamily::laplace(), x, y);
    CHECK(G(0, 0) == doctest::Approx(1.0 / (4.0 * kPi * (x - y).norm())).epsilon(1e-15));
}

TEST_CASE("stokes and elasticity fundamental solutions match the closed forms") {
    const Vec3 x(0.1, -0.2, 0.3), y(-0.7, 0.5, 0.9);
    const KernelMatrix S = fundamental_solution(KernelFamily::stokes(2.0), x, y);
    CHECK((S - stokeslet(x - y, 2.0)).norm() < 1e-15);
    const KernelMatrix E = fundamental_solution(KernelFamily::elasticity(0.3, 1.5), x, y);
    CHECK((E - kelvin(x - y, 1.5, 0.3)).norm() < 1e-15);
    CHECK((E - E.transpose()).norm() < 1e-16);
}

TEST_CASE("fundamental solutions are symmetric under exchange of x and y") {
    std::mt19937_64 rng(3);
    for (const KernelFamily& k :
         {KernelFamily::laplace(), KernelFamily::stokes(), KernelFamily::elasticity(0.25)}) {
        const Vec3 x = random_in_box(rng, -1, 1), y = random_in_box(rng, -1, 1);
        CHECK((fundamental_solution(k, x, y) - fundamental_solution(k, y, x).transpose()).norm() <
              1e-14);
    }
}

TEST_CASE("fundamental solutions satisfy their PDEs away from the source") {
    const Vec3 y(0.3, -0.1, 0.2), x(1.1, 0.4, -0.6);
    const double h = 1e-3;
    Eigen::VectorXd one(1);
    one << 1.0;
    CHECK(std::abs(laplacian_fd(KernelFamily::laplace(), x, y, one, h)[0]) < 1e-6);

    const Eigen::Vector3d psi(0.3, -0.8, 0.5);
    const KernelFamily stokes = KernelFamily::stokes(1.0);
    CHECK(std::abs(divergence_fd(stokes, x, y, psi, h)) < 1e-7);
    // mu lap u = grad p with p = r . psi / (4 pi rho^3)
    auto pressure = [&](const Vec3& z) {
        const Vec3 r = z - y;
        return r.dot(psi) / (4.0 * kPi * std::pow(r.norm(), 3));
    };
    Eigen::Vector3d grad_p;
    for (int a = 0; a < 3; ++a) {
        Vec3 e = Vec3::Zero();
        e[a] = h;
        grad_p[a] = (pressure(x + e) - pressure(x - e)) / (2.0 * h);
    }
    CHECK((laplacian_fd(stokes, x, y, psi, h) - grad_p).norm() < 1e-6);

    // Navier: mu lap u + (lambda + mu) grad div u = 0
    const double nu = 0.3, mu = 1.0, lambda = 2.0 * mu * nu / (1.0 - 2.0 * nu);
    const KernelFamily elastic = KernelFamily::elasticity(nu, mu);
    Eigen::Vector3d grad_div;
    for (int a = 0; a < 3; ++a) {
        Vec3 e = Vec3::Zero();
        e[a] = h;
        grad_div[a] = (divergence_fd(elastic, x + e, y, psi, h) - divergence_fd(elastic, x - e, y, psi, h)) /
                      (2.0 * h);
    }
    const Eigen::Vector3d navier = mu * laplacian_fd(elastic, x, y, psi, h) + (lambda + mu) * grad_div;
    CHECK(navier.norm() < 1e-5);
}

TEST_CASE("coincident points are a domain error") {
    const Vec3 x(1, 2, 3);
    CHECK_THROWS_AS(fundamental_solution(KernelFamily::laplace(), x, x), DomainError);
    CHECK_THROWS_AS(double_layer_kernel(KernelFamily::stokes(), x, x, Vec3::UnitZ()), DomainError);
}

TEST_CASE("invalid material constants are rejected") {
    CHECK_THROWS_AS(KernelFamily::elasticity(0.5), UsageError);
    CHECK_THROWS_AS(KernelFamily::elasticity(0.0), UsageError);
    CHECK_THROWS_AS(KernelFamily::stokes(-1.0), UsageError);
}

TEST_CASE("double layer of a constant density is the constant inside and zero outside") {
    const QuadratureNodeSet nodes = sphere_nodes(0.5, 16);
    PointCloud targets;
    targets.push_back(Vec3(0.05, -0.1, 0.08));
    targets.push_back(Vec3(1.2, 0.3, -0.2));
    for (const KernelFamily& k :
         {KernelFamily::laplace(), KernelFamily::stokes(), KernelFamily::elasticity(0.3)}) {
        const int d = k.dim();
        DensityField c(d, nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (int a = 0; a < d; ++a) c.values[i * d + a] = 0.5 + 0.25 * a;
        const auto v = smooth_potential(k, Layer::Double, nodes, c, targets);
        for (int a = 0; a < d; ++a) {
            CHECK(v[a] == doctest::Approx(0.5 + 0.25 * a).epsilon(1e-9));
            CHECK(std::abs(v[d + a]) < 1e-9);
        }
    }
}

TEST_CASE("Green's identity with reference tractions holds at interior points") {
    const QuadratureNodeSet nodes = sphere_nodes(0.5, 16);
    PointCloud targets;
    targets.push_back(Vec3(0.0, 0.0, 0.0));
    targets.push_back(Vec3(0.1, -0.15, 0.05));
    for (const KernelFamily& k :
         {KernelFamily::laplace(), KernelFamily::stokes(1.3), KernelFamily::elasticity(0.3, 0.7)}) {
        const auto ref = ReferenceSolution::on_sphere(k, 12, 5);
        const int d = k.dim();
        DensityField u(d, nodes.size()), t(d, nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto ui = ref.value(nodes.position(i));
            const auto ti = ref.traction(nodes.position(i), nodes.normal(i));
            for (int a = 0; a < d; ++a) {
                u.values[i * d + a] = ui[a];
                t.values[i * d + a] = ti[a];
            }
        }
        const auto s = smooth_potential(k, Layer::Single, nodes, t, targets);
        const auto dl = smooth_potential(k, Layer::Double, nodes, u, targets);
        for (std::size_t j = 0; j < targets.size(); ++j) {
            const auto exact = ref.value(targets.position(j));
            for (int a = 0; a < d; ++a) CHECK(s[j * d + a] + dl[j * d + a] == doctest::Approx(exact[a]).epsilon(1e-8));
        }
    }
}

}  // TEST_SUITE
