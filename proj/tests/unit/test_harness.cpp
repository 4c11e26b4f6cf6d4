#include "support.hpp"

#include <cmath>
#include <sstream>

using namespace hedgehog;
using namespace hedgehog::test;

TEST_SUITE("harness") {

TEST_CASE("order fit recovers the exponent of model data") {
    const std::vector<double> h = {0.4, 0.2, 0.1, 0.05};
    std::vector<double> e;
    for (double x : h) e.push_back(3.0 * std::pow(x, 5));
    CHECK(estimated_order(h, e) == doctest::Approx(5.0).epsilon(1e-12));
    const std::vector<double> bad = {1.0};
    CHECK_THROWS_AS(estimated_order(bad, bad), UsageError);
}

TEST_CASE("charge placement is reproducible from the seed") {
    const KernelFamily k = KernelFamily::stokes();
    const auto a = ReferenceSolution::on_sphere(k, 50, 42);
    const auto b = ReferenceSolution::on_sphere(k, 50, 42);
    const auto c = ReferenceSolution::on_sphere(k, 50, 43);
    CHECK(a.charges == b.charges);
    CHECK(a.strengths == b.strengths);
    CHECK(a.charges != c.charges);
    for (const Vec3& y : a.charges) CHECK(y.norm() == doctest::Approx(1.0));
    for (double s : a.strengths) CHECK((s >= 0.0 && s <= 1.0));
    CHECK(a.strengths.size() == 150);
}

TEST_CASE("Laplace reference traction is the normal derivative") {
    const auto ref = ReferenceSolution::on_sphere(KernelFamily::laplace(), 5, 1);
    const Vec3 x(0.1, 0.2, -0.3), n = Vec3(1, -2, 0.5).normalized();
    const double h = 1e-6;
    const double fd = (ref.value(x + h * n)[0] - ref.value(x - h * n)[0]) / (2 * h);
    CHECK(ref.traction(x, n)[0] == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("elasticity traction agrees with finite-difference stress") {
    const double nu = 0.3, mu = 0.8, lambda = 2 * mu * nu / (1 - 2 * nu);
    const KernelFamily k = KernelFamily::elasticity(nu, mu);
    const auto ref = ReferenceSolution::on_sphere(k, 4, 9);
    const Vec3 x(0.1, -0.2, 0.05), n = Vec3(0.3, 0.4, -1.0).normalized();
    const double h = 1e-5;
    Mat3 grad;
    for (int j = 0; j < 3; ++j) {
        Vec3 e = Vec3::Zero();
        e[j] = h;
        grad.col(j) = (ref.value(x + e) - ref.value(x - e)) / (2 * h);
    }
    const Mat3 sigma = lambda * grad.trace() * Mat3::Identity() + mu * (grad + grad.transpose());
    const Vec3 expect = sigma * n;
    const auto got = ref.traction(x, n);
    for (int a = 0; a < 3; ++a) CHECK(got[a] == doctest::Approx(expect[a]).epsilon(1e-6).scale(expect.norm()));
}

TEST_CASE("zero charges give an exactly zero Green's identity residual") {
    ExperimentConfig cfg;
    cfg.kernel = KernelFamily::laplace();
    cfg.charges = 0;
    cfg.levels = 1;
    cfg.initial_patches = 6;
    cfg.eps_g = 1e-4;
    cfg.degree = 6;
    cfg.upsample_levels = 1;
    cfg.eval.q = 5;
    const auto rows = run_greens_identity(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].error == 0.0);
}

TEST_CASE("convergence levels quadruple the patch count") {
    ExperimentConfig cfg;
    cfg.levels = 3;
    cfg.initial_patches = 20;
    cfg.eps_g = 1e-3;
    cfg.degree = 6;
    const auto levels = convergence_levels(cfg);
    REQUIRE(levels.size() == 3);
    CHECK(levels[0].size() >= 20);
    CHECK(levels[1].size() == 4 * levels[0].size());
    CHECK(levels[2].size() == 4 * levels[1].size());
}

TEST_CASE("extrapolation study structure") {
    SUBCASE("error grows with R / rho at fixed rp / R") {
        double prev = 0.0;
        for (double x : log_grid(0.05, 0.9, 12)) {
            const double e = extrapolation_error(6, 0.1 * x, 0.1 * x / 6, -0.1);
            CHECK(e > prev);
            prev = e;
        }
    }
    SUBCASE("very small spacings degrade high orders") {
        const double R = 0.02;
        const double tight = extrapolation_error(14, R, 0.01 * R / 14, -0.1);
        const double wide = extrapolation_error(14, R, R / 14, -0.1);
        CHECK(tight > wide);
    }
    SUBCASE("the sweep covers the grid") {
        const auto rows = run_extrapolation_sweep({6, 8}, log_grid(0.01, 1, 5), log_grid(0.1, 10, 4));
        CHECK(rows.size() == 2 * 5 * 4);
        std::ostringstream csv;
        write_csv(csv, rows);
        CHECK(csv.str().rfind("p,R_over_rho,rp_over_R,log10_relative_error\n", 0) == 0);
    }
    CHECK_THROWS_AS(extrapolation_error(6, 0.1, 0.01, 0.1), UsageError);
}

TEST_CASE("b selection follows the extrapolation map") {
    const double b4 = select_b(1e-4, 6, 1.0), b6 = select_b(1e-6, 6, 1.0);
    CHECK(b6 < b4);
    CHECK(extrapolation_error(6, 0.1 * b6, 0.1 * b6 / 6, -0.1) <= 1e-6);
    CHECK(select_b(1e-6, 6, 0.5) == doctest::Approx(0.5 * b6));
}

TEST_CASE("geometry specs") {
    CHECK(load_geometry("builtin:sphere").size() == 6);
    CHECK(load_geometry("builtin:torus:1.0,0.2").size() == 32);
    CHECK_THROWS_AS(load_geometry("builtin:cube"), UsageError);
    CHECK_THROWS_AS(load_geometry("builtin:sphere:x"), UsageError);
    CHECK_THROWS(load_geometry("/nonexistent/file.geo"));
}

}  // TEST_SUITE
