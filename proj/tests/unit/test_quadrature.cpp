#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace hedgehog;
using namespace hedgehog::test;

namespace {

double poly55(double s, double t) {
    double v = 0.0;
    for (int i = 0; i <= 5; ++i)
        for (int j = 0; j <= 5; ++j) v += std::cos(1.0 + i + 3.0 * j) * std::pow(s, i) * std::pow(t, j);
    return v;
}

// Naive pairwise sum through the public kernel functions.
std::vector<double> naive_sum(const KernelFamily& k, Layer layer, const PointCloud& src,
                              std::span<const double> str, const PointCloud& tgt) {
    const int d = k.dim();
    std::vector<double> out(tgt.size() * d, 0.0);
    for (std::size_t i = 0; i < tgt.size(); ++i)
        for (std::size_t j = 0; j < src.size(); ++j) {
            const KernelMatrix K = layer_kernel(k, layer, tgt.position(i), src.position(j),
                                                src.has_normals() ? src.normal(j) : Vec3::Zero());
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) out[i * d + a] += K(a, b) * str[j * d + b];
        }
    return out;
}

}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("Clenshaw-Curtis integrates polynomials below its order exactly") {
    for (int q : {2, 5, 12, 20}) {
        const auto rule = cc_rule(q);
        REQUIRE(rule.nodes.size() == static_cast<std::size_t>(q));
        CHECK(rule.nodes.front() == -1.0);
        CHECK(rule.nodes.back() == 1.0);
        for (int k = 0; k < q; ++k) {
            double sum = 0.0;
            for (int i = 0; i < q; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], k);
            const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
            CHECK(sum == doctest::Approx(exact).epsilon(1e-13));
        }
        for (double w : rule.weights) CHECK(w > 0.0);
    }
}

TEST_CASE("Chebyshev interpolation is exact on polynomials of degree below q") {
    const int q = 9;
    const auto rule = cc_rule(q);
    const std::vector<double> pts = {-1.0, -0.77, 0.0, 0.123, 0.5, 1.0};
    const auto M = chebyshev_interpolation_matrix(q, pts);
    auto f = [](double x) { return 1.0 - 2.0 * x + 0.3 * std::pow(x, 5) - std::pow(x, 8); };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double v = 0.0;
        for (int j = 0; j < q; ++j) v += M[i * q + j] * f(rule.nodes[j]);
        CHECK(v == doctest::Approx(f(pts[i])).epsilon(1e-13));
    }
}

TEST_CASE("node numbering follows patch, s, t") {
    const PatchSet set = fitted(make_torus(1.0, 0.3, 4, 3), 4, 1e-2);
    const int q = 5;
    const auto nodes = discretize(set, q);
    const auto rule = cc_rule(q);
    REQUIRE(nodes.size() == set.size() * q * q);
    const std::size_t I = 3 * q * q + 2 * q + 4;
    CHECK(nodes.patch[I] == 3);
    CHECK(nodes.s[I] == rule.nodes[2]);
    CHECK(nodes.t[I] == rule.nodes[4]);
    CHECK((nodes.position(I) - set[3].evaluate(rule.nodes[2], rule.nodes[4])).norm() < 1e-15);
}

TEST_CASE("direct summation equals the naive pairwise sum") {
    const PatchSet set = fitted(make_sphere(0.5), 6, 1e-3);
    const auto nodes = discretize(set, 4);
    std::mt19937_64 rng(1);
    PointCloud targets;
    for (int i = 0; i < 7; ++i) targets.push_back(random_in_box(rng, -1, 1));
    for (const KernelFamily& k :
         {KernelFamily::laplace(), KernelFamily::stokes(0.7), KernelFamily::elasticity(0.2)}) {
        std::vector<double> str(nodes.size() * k.dim());
        std::uniform_real_distribution<double> u(-1, 1);
        for (double& s : str) s = u(rng);
        for (Layer layer : {Layer::Single, Layer::Double}) {
            std::vector<double> got(targets.size() * k.dim());
            DirectSummation().evaluate(k, layer, nodes.points, str, targets, got);
            const auto expect = naive_sum(k, layer, nodes.points, str, targets);
            for (std::size_t i = 0; i < got.size(); ++i)
                CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("coincident sources are rejected or skipped on request") {
    PointCloud src;
    src.push_back(Vec3(0, 0, 0), Vec3(0, 0, 1));
    src.push_back(Vec3(1, 0, 0), Vec3(0, 0, 1));
    PointCloud tgt;
    tgt.push_back(Vec3(0, 0, 0));
    const std::vector<double> str = {1.0, 2.0};
    std::vector<double> out(1);
    CHECK_THROWS_AS(DirectSummation().evaluate(KernelFamily::laplace(), Layer::Single, src, str, tgt, out),
                    DomainError);
    DirectSummation().evaluate(KernelFamily::laplace(), Layer::Single, src, str, tgt, out, true);
    CHECK(out[0] == doctest::Approx(2.0 / (4 * std::numbers::pi)));
}

TEST_CASE("upsampling is exact on bidegree (5,5) polynomials") {
    const PatchSet coarse = fitted(make_torus(1.0, 0.3, 4, 3), 6, 1e-3);
    const int q = 8;
    const PatchSet fine = uniform_upsample(coarse, 2);
    const Upsampler up(coarse, fine, q);
    const auto cn = discretize(coarse, q);
    const auto fn = discretize(fine, q);
    DensityField density(1, cn.size());
    for (std::size_t I = 0; I < cn.size(); ++I) density.values[I] = poly55(cn.s[I], cn.t[I]);
    const DensityField f = upsample_density(up, density);
    double err = 0.0;
    for (std::size_t J = 0; J < fn.size(); ++J) {
        const SurfacePatch& child = fine[fn.patch[J]];
        const SurfacePatch& parent = coarse[fine.parent(fn.patch[J])];
        const auto [s, t] = child.domain.relative_to(parent.domain, fn.s[J], fn.t[J]);
        err = std::max(err, std::abs(f.values[J] - poly55(s, t)));
    }
    CHECK(err < 1e-12);
}

TEST_CASE("upsampling transpose is the adjoint") {
    const PatchSet coarse = fitted(make_torus(1.0, 0.3, 4, 3), 6, 1e-3);
    const int q = 6, dim = 3;
    const PatchSet fine = uniform_upsample(coarse, 1);
    const Upsampler up(coarse, fine, q);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> x(coarse.size() * q * q * dim), y(fine.size() * q * q * dim);
    for (double& v : x) v = u(rng);
    for (double& v : y) v = u(rng);
    std::vector<double> Ax(y.size()), Aty(x.size(), 0.0);
    up.apply(x, Ax, dim);
    up.apply_transpose(y, Aty, dim);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += Ax[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * Aty[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("upsampler requires lineage") {
    const PatchSet coarse = fitted(make_torus(1.0, 0.3, 4, 3), 4, 1e-2);
    PatchSet orphan(PatchRole::Fine);
    orphan.add(coarse[0]);
    CHECK_THROWS_AS(Upsampler(coarse, orphan, 4), UsageError);
}

TEST_CASE("smooth quadrature of the sphere area") {
    const PatchSet set = fitted(make_sphere(1.0), 12, 1e-9);
    const auto nodes = discretize(set, 16);
    double area = 0.0;
    for (double w : nodes.weight) area += w;
    CHECK(area == doctest::Approx(4 * std::numbers::pi).epsilon(1e-8));
}

TEST_CASE("error heuristic decreases with q") {
    CHECK(quadrature_error_heuristic(0.1, 4, 20, 1.0) < quadrature_error_heuristic(0.1, 4, 10, 1.0));
}

}  // TEST_SUITE
