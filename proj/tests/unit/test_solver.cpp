#include "support.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace hedgehog;
using namespace hedgehog::test;

namespace {

LinearMap dense_map(const Eigen::MatrixXd& A) {
    return [&A](std::span<const double> x, std::span<double> y) {
        Eigen::Map<Eigen::VectorXd>(y.data(), y.size()) =
            A * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    };
}

// 12-patch toy surface: a 4 x 3 torus with a coarse rule.
std::unique_ptr<Discretization> toy_disc(int q = 4) {
    EvalOptions o;
    o.q = q;
    o.b = 0.15;
    o.a = 0.05;
    PatchSet coarse = fitted(make_torus(0.5, 0.2, 4, 3), 5, 1e-1);
    REQUIRE(coarse.size() == 12);
    PatchSet fine = uniform_upsample(coarse, 1);
    return std::make_unique<Discretization>(std::move(coarse), std::move(fine), o);
}

BVProblem sphere_problem(const KernelFamily& k, const ReferenceSolution& ref) {
    BVProblem problem;
    problem.kernel = k;
    problem.data = ref.boundary_condition();
    problem.geometry = make_spheroid(0.45, 0.6);
    problem.degree = 10;
    problem.eval.q = 10;
    problem.eval.b = 0.15;
    problem.eval.a = 0.025;
    problem.admissibility.eps_g = 1e-6;
    problem.admissibility.eps_f = 1e-6;
    problem.uniform_levels = 2;
    problem.dense_operator = true;
    return problem;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("GMRES matches a direct solve on a nonsymmetric system") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    const int n = 60;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) * 0.5;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) += 0.3 * u(rng) / std::sqrt(n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = u(rng);
    const auto res = gmres(dense_map(A), std::span<const double>(b.data(), n), 1e-12, 200);
    CHECK(res.converged);
    CHECK(res.history.front() == 1.0);
    for (std::size_t k = 1; k < res.history.size(); ++k) CHECK(res.history[k] <= res.history[k - 1] * (1 + 1e-12));
    const Eigen::VectorXd x = A.lu().solve(b);
    CHECK((Eigen::Map<const Eigen::VectorXd>(res.x.data(), n) - x).norm() < 1e-10 * x.norm());
    CHECK(res.residual < 1e-11);
}

TEST_CASE("GMRES edge cases") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
    const std::vector<double> zero(5, 0.0), b = {1, 2, 3, 4, 5};
    const auto z = gmres(dense_map(I), zero);
    CHECK(z.converged);
    CHECK(z.iterations == 0);
    const auto one = gmres(dense_map(I), b);
    CHECK(one.iterations == 1);
    CHECK(one.x[3] == doctest::Approx(4.0));
    CHECK_THROWS_AS(gmres(dense_map(I), b, 0.0), UsageError);
    const Eigen::MatrixXd rot = (Eigen::MatrixXd(2, 2) << 0, 1, -1, 0).finished();
    const std::vector<double> b2 = {1, 0};
    const auto capped = gmres(dense_map(rot), b2, 1e-12, 1);
    CHECK_FALSE(capped.converged);
}

TEST_CASE("matrix-free operator equals both dense assemblies on the toy surface") {
    const auto disc = toy_disc();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    for (const KernelFamily& k : {KernelFamily::laplace(), KernelFamily::elasticity(0.3)}) {
        const BoundaryOperator op(k, *disc);
        const Eigen::MatrixXd rows = op.assemble_dense();
        // rounding is amplified by the extrapolation weights, so compare against |A| |x|
        const double norm = rows.cwiseAbs().rowwise().sum().maxCoeff();
        Eigen::VectorXd x(op.size()), y(op.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = u(rng);
        op.apply(std::span<const double>(x.data(), x.size()), std::span<double>(y.data(), y.size()));
        CHECK((rows * x - y).cwiseAbs().maxCoeff() <= 1e-12 * norm * x.cwiseAbs().maxCoeff());
        if (k.dim() == 1) {
            const Eigen::MatrixXd cols = op.assemble_columns();
            CHECK((rows - cols).cwiseAbs().maxCoeff() <= 1e-12 * norm);
        } else {
            // a handful of columns through unit vectors
            Eigen::VectorXd e = Eigen::VectorXd::Zero(op.size()), col(op.size());
            for (int c = 0; c < 12; ++c) {
                const Eigen::Index j = static_cast<Eigen::Index>(rng() % op.size());
                e.setZero();
                e[j] = 1.0;
                op.apply(std::span<const double>(e.data(), e.size()), std::span<double>(col.data(), col.size()));
                CHECK((rows.col(j) - col).cwiseAbs().maxCoeff() <= 1e-12 * norm);
            }
        }
    }
}

TEST_CASE("interior Laplace solve reproduces the reference field") {
    const KernelFamily k = KernelFamily::laplace();
    const auto ref = ReferenceSolution::on_sphere(k, 20, 3);
    const BVProblem problem = sphere_problem(k, ref);
    const Solution sol = solve(problem);
    CHECK(sol.report.converged);
    CHECK(sol.report.iterations < 30);
    PointCloud targets;
    targets.push_back(Vec3(0.0, 0.1, 0.0));
    targets.push_back(Vec3(0.3, 0.0, 0.2));
    targets.push_back(Vec3(0.0, 0.0, 0.55));
    std::vector<char> mask;
    const auto v = evaluate_solution(k, sol.assembly, sol.density, targets, &mask);
    for (std::size_t j = 0; j < targets.size(); ++j) {
        CHECK(mask[j] == 1);
        CHECK(v[j] == doctest::Approx(ref.value(targets.position(j))[0]).epsilon(1e-4));
    }
}

TEST_CASE("matrix-free and dense solves agree") {
    const KernelFamily k = KernelFamily::laplace();
    const auto ref = ReferenceSolution::on_sphere(k, 5, 4);
    BVProblem problem = sphere_problem(k, ref);
    problem.eval.q = 6;
    problem.refine_for_data = false;
    problem.uniform_levels = 1;
    const Solution dense = solve(problem);
    problem.dense_operator = false;
    const Solution free = solve(problem);
    REQUIRE(dense.density.values.size() == free.density.values.size());
    for (std::size_t i = 0; i < dense.density.values.size(); ++i)
        CHECK(dense.density.values[i] == doctest::Approx(free.density.values[i]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("interior Stokes solve reproduces the reference field") {
    const KernelFamily k = KernelFamily::stokes();
    const auto ref = ReferenceSolution::on_sphere(k, 10, 7);
    BVProblem problem = sphere_problem(k, ref);
    problem.eval.q = 8;
    problem.refine_for_data = false;
    const Solution sol = solve(problem);
    CHECK(sol.report.converged);
    PointCloud targets;
    targets.push_back(Vec3(0.1, 0.0, -0.1));
    const auto v = evaluate_solution(k, sol.assembly, sol.density, targets);
    const auto exact = ref.value(targets.position(0));
    for (int a = 0; a < 3; ++a) CHECK(v[a] == doctest::Approx(exact[a]).epsilon(1e-3).scale(exact.norm()));
}

TEST_CASE("exterior Laplace solve with the completion term") {
    const KernelFamily k = KernelFamily::laplace();
    Eigen::VectorXd q(1);
    q << 1.0;
    const auto ref = ReferenceSolution::single(k, Vec3(0.05, -0.05, 0.1), q);
    BVProblem problem = sphere_problem(k, ref);
    problem.side = Side::Exterior;
    problem.eval.q = 8;
    const Solution sol = solve(problem);
    CHECK(sol.report.converged);
    REQUIRE(sol.assembly.completion_center.has_value());
    PointCloud targets;
    targets.push_back(Vec3(1.0, 0.2, 0.0));
    targets.push_back(Vec3(0.0, 0.0, 0.9));
    targets.push_back(Vec3(0.0, 0.0, 0.1));
    std::vector<char> mask;
    const auto v = evaluate_solution(k, sol.assembly, sol.density, targets, &mask);
    CHECK(mask[2] == 0);
    for (int j = 0; j < 2; ++j) CHECK(v[j] == doctest::Approx(ref.value(targets.position(j))[0]).epsilon(1e-4));
}

TEST_CASE("exterior problems are Laplace only") {
    const KernelFamily k = KernelFamily::stokes();
    const auto ref = ReferenceSolution::on_sphere(k, 3, 1);
    BVProblem problem = sphere_problem(k, ref);
    problem.side = Side::Exterior;
    CHECK_THROWS_AS(assemble(problem), UsageError);
}

}  // TEST_SUITE
