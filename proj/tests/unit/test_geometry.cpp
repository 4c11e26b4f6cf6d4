#include "support.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace hedgehog;
using namespace hedgehog::test;

namespace {

double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

// Bernstein basis straight from the definition in u = (s + 1) / 2.
double bernstein_oracle(int n, int l, double s) {
    const double u = 0.5 * (s + 1.0);
    return binomial(n, l) * std::pow(u, l) * std::pow(1.0 - u, n - l);
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("bernstein basis matches the binomial definition") {
    for (int n : {1, 3, 8, 15}) {
        std::vector<double> b(n + 1);
        for (double s : {-1.0, -0.3, 0.0, 0.71, 1.0}) {
            bernstein_basis(n, s, b.data());
            double sum = 0.0;
            for (int l = 0; l <= n; ++l) {
                CHECK(b[l] == doctest::Approx(bernstein_oracle(n, l, s)).epsilon(1e-13));
                sum += b[l];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("bernstein derivatives agree with finite differences") {
    const int n = 7;
    const double s = 0.37, h = 1e-5;
    std::vector<double> v(n + 1), d1(n + 1), d2(n + 1), vp(n + 1), vm(n + 1);
    bernstein_basis_derivs(n, s, v.data(), d1.data(), d2.data());
    bernstein_basis(n, s + h, vp.data());
    bernstein_basis(n, s - h, vm.data());
    for (int l = 0; l <= n; ++l) {
        CHECK(d1[l] == doctest::Approx((vp[l] - vm[l]) / (2 * h)).epsilon(1e-8));
        CHECK(d2[l] == doctest::Approx((vp[l] - 2 * v[l] + vm[l]) / (h * h)).epsilon(1e-4));
    }
}

TEST_CASE("quadrisection is exact reparametrization") {
    const BezierPatch p = bumpy_patch(5, 0.4);
    const auto children = p.quadrisect();
    const Subdomain root;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 4; ++k) {
        const Subdomain sub = root.child(k);
        for (int i = 0; i < 20; ++i) {
            const double s = u(rng), t = u(rng);
            const auto [ps, pt] = sub.map(s, t);
            CHECK((children[k].evaluate(s, t) - p.evaluate(ps, pt)).norm() < 1e-14);
        }
    }
}

TEST_CASE("subdomain children and relative coordinates compose") {
    const Subdomain root;
    const Subdomain c = root.child(3).child(0);
    CHECK(c.half == 0.25);
    CHECK(c.cs == 0.25);
    CHECK(c.ct == 0.25);
    const auto [s, t] = c.relative_to(root.child(3), 1.0, -1.0);
    CHECK(s == doctest::Approx(0.0));
    CHECK(t == doctest::Approx(-1.0));
}

TEST_CASE("frame partials agree with finite differences") {
    const BezierPatch p = bumpy_patch(4, 0.3);
    const double s = 0.2, t = -0.4, h = 1e-6;
    const PatchFrame f = p.frame(s, t);
    CHECK((f.ds - (p.evaluate(s + h, t) - p.evaluate(s - h, t)) / (2 * h)).norm() < 1e-8);
    CHECK((f.dt - (p.evaluate(s, t + h) - p.evaluate(s, t - h)) / (2 * h)).norm() < 1e-8);
}

TEST_CASE("fitting a polynomial embedding of the same degree is exact") {
    const BezierPatch p = bumpy_patch(4, 0.3);
    const FitResult fit = fit_patch(bezier_embedding(p), Subdomain{}, 4);
    CHECK(fit.error < 1e-12);
    const QuadMesh mesh = [&] {
        QuadMesh m;
        m.quads.push_back(bezier_embedding(p));
        return m;
    }();
    const auto result = refine_for_geometry(mesh, 4, 1e-10);
    CHECK(result.patches.size() == 1);
}

TEST_CASE("sphere normals point outward and the area is 4 pi r^2") {
    const double radius = 0.7;
    const PatchSet set = fitted(make_sphere(radius), 12, 1e-9);
    double area = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        area += set.length(i) * set.length(i);
        const Vec3 x = set[i].evaluate(0.3, -0.2);
        CHECK(normal(set[i], 0.3, -0.2).dot(x) > 0.99 * radius);
    }
    CHECK(area == doctest::Approx(4 * std::numbers::pi * radius * radius).epsilon(1e-8));
}

TEST_CASE("flipped mesh reverses normals") {
    const QuadMesh mesh = make_spheroid(0.5, 0.7);
    const PatchSet a = fitted(mesh, 8, 1e-4);
    const PatchSet b = fitted(mesh.flipped(), 8, 1e-4);
    REQUIRE(a.size() == b.size());
    CHECK((normal(a[0], 0.1, 0.2) + normal(b[0], 0.1, 0.2)).norm() < 1e-12);
}

TEST_CASE("torus mesh links are edge and vertex adjacencies") {
    QuadMesh mesh = make_torus(1.0, 0.3, 8, 4);
    mesh.build_links();
    int edges = 0;
    for (const auto& l : mesh.links) edges += l.shared_corners == 2;
    CHECK(edges == 2 * 32);
}

TEST_CASE("quadrisect_all keeps roles and lineage") {
    PatchSet fine(PatchRole::Fine);
    fine.add(SurfacePatch{bumpy_patch()}, 0);
    const PatchSet next = quadrisect_all(fine);
    CHECK(next.size() == 4);
    CHECK(next.role() == PatchRole::Fine);
    CHECK(next.has_lineage());
    CHECK(next.max_depth() == 1);
    double area = 0.0;
    for (double L : next.lengths()) area += L * L;
    CHECK(area == doctest::Approx(fine.length(0) * fine.length(0)).epsilon(1e-10));
}

TEST_CASE("geometry file round trip") {
    const std::vector<BezierPatch> in = {bumpy_patch(3, 0.1), bumpy_patch(3, -0.2, 1.0)};
    std::stringstream io;
    write_geometry(io, in);
    const auto out = read_geometry(io);
    REQUIRE(out.size() == 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < in[i].control_points().size(); ++j)
            CHECK((out[i].control_points()[j] - in[i].control_points()[j]).norm() == 0.0);
}

TEST_CASE("malformed geometry files are parse errors") {
    std::stringstream bad("degree 2\nquads 1\n0 0 0 0 0 0\n");
    CHECK_THROWS_AS(read_geometry(bad), ParseError);
    std::stringstream junk("hello");
    CHECK_THROWS_AS(read_geometry(junk), ParseError);
}

TEST_CASE("degenerate patches are reported") {
    std::vector<Vec3> ctrl(4, Vec3::Zero());
    const BezierPatch collapsed(1, ctrl);
    CHECK_THROWS_AS(normal(SurfacePatch{collapsed}, 0.0, 0.0), SingularParametrization);
}

}  // TEST_SUITE
