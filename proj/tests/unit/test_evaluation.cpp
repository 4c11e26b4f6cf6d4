#include "support.hpp"

#include <cmath>
#include <sstream>

using namespace hedgehog;
using namespace hedgehog::test;

namespace {

// Neville's scheme on nodes 0..p; independent of the barycentric weights.
double neville(std::vector<double> v, double t) {
    const int n = static_cast<int>(v.size());
    for (int k = 1; k < n; ++k)
        for (int i = 0; i < n - k; ++i) v[i] = ((t - (i + k)) * v[i] - (t - i) * v[i + 1]) / (-k);
    return v[0];
}

EvalOptions small_options() {
    EvalOptions o;
    o.q = 10;
    o.b = 0.3;
    o.a = 0.05;
    return o;
}

// Admissible sphere with an adaptively upsampled fine set.
std::unique_ptr<Discretization> small_disc(const EvalOptions& o, double radius = 0.5, double eps_g = 1e-5) {
    AdmissibilityConfig adm;
    adm.check = o;
    PatchSet coarse = enforce_admissibility(fitted(make_sphere(radius), 8, eps_g), adm).patches;
    PatchSet fine = adaptive_upsample(coarse, o).patches;
    return std::make_unique<Discretization>(std::move(coarse), std::move(fine), o);
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("extrapolation weights form a partition of unity and hit nodes exactly") {
    for (int p : {1, 4, 6, 10}) {
        for (double t : {-6.0, -2.5, 0.3, 1.0, 0.0}) {
            const auto w = extrapolation_weights(p, t);
            double sum = 0.0;
            for (double x : w) sum += x;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
        const auto w = extrapolation_weights(p, 1.0);
        for (int s = 0; s <= p; ++s) CHECK(w[s] == (s == 1 ? 1.0 : 0.0));
    }
}

TEST_CASE("extrapolation is exact on polynomials up to degree p") {
    const int p = 6;
    std::vector<double> v(p + 1);
    for (int deg : {3, 6}) {
        auto f = [deg](double t) { return std::pow(0.3 * t - 0.2, deg) + 0.5 * t; };
        for (int s = 0; s <= p; ++s) v[s] = f(s);
        for (double t : {-6.0, -3.3, 2.5}) CHECK(extrapolate(v, t) == doctest::Approx(f(t)).epsilon(1e-12));
    }
}

TEST_CASE("extrapolation agrees with Neville's scheme on arbitrary data") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int p : {2, 6, 9}) {
        std::vector<double> v(p + 1);
        for (double& x : v) x = u(rng);
        for (double t : {-6.0, -0.7, 3.3}) CHECK(extrapolate(v, t) == doctest::Approx(neville(v, t)).epsilon(1e-11));
    }
}

TEST_CASE("check points on a unit flat patch") {
    const PatchSet plate = fitted(make_flat_rectangle(-0.5, -0.5, 1, 1, 0), 2);
    REQUIRE(plate.length(0) == doctest::Approx(1.0));
    EvalOptions o;
    o.b = 0.03;
    o.a = 0.005;
    const auto in = generate_check_points(plate[0], plate.length(0), 0.2, -0.3, o, Side::Interior);
    const auto out = generate_check_points(plate[0], plate.length(0), 0.2, -0.3, o, Side::Exterior);
    REQUIRE(in.points.size() == 7);
    CHECK(in.points[0].z() == doctest::Approx(-0.03));
    CHECK(in.points[6].z() == doctest::Approx(-0.06));
    for (int s = 0; s < 7; ++s) {
        CHECK(out.points[s].z() == doctest::Approx(-in.points[s].z()));
        CHECK((out.points[s].head<2>() - in.points[s].head<2>()).norm() < 1e-15);
    }
    for (int s = 1; s < 7; ++s) CHECK((in.points[s] - in.points[s - 1]).norm() == doctest::Approx(0.005));
    CHECK((in.center() - in.anchor).norm() == doctest::Approx(o.center_distance(1.0)));
}

TEST_CASE("sqrt scaling uses sqrt(L)") {
    EvalOptions o;
    o.sqrt_scaling = true;
    CHECK(o.first_distance(0.25) == doctest::Approx(0.5 * o.b));
    CHECK(o.spacing(0.25) == doctest::Approx(0.5 * o.a));
    o.a = 1.5;
    CHECK_THROWS_AS(o.validate(), UsageError);
}

TEST_CASE("zone marking") {
    const EvalOptions o = small_options();
    const auto disc = small_disc(o);
    const auto& nodes = disc->coarse_nodes();
    const double L = disc->coarse().length(0);
    PointCloud targets;
    targets.push_back(Vec3::Zero());
    targets.push_back(nodes.position(5) - 0.5 * L * nodes.normal(5));
    targets.push_back(Vec3(2.0, 0.0, 0.0));
    targets.push_back(nodes.position(7) + 0.3 * L * nodes.normal(7));
    const auto labels = mark_points(targets, *disc, 1e-8);
    CHECK(labels[0].inside);
    CHECK(labels[0].zone == Zone::Far);
    CHECK(labels[1].inside);
    CHECK(labels[1].zone == Zone::Near);
    REQUIRE(labels[1].closest.has_value());
    CHECK(labels[1].closest->distance == doctest::Approx(0.5 * L).epsilon(1e-6));
    CHECK_FALSE(labels[2].inside);
    CHECK_FALSE(labels[3].inside);
    CHECK(labels[3].zone == Zone::Near);
}

TEST_CASE("far targets reuse plain coarse quadrature") {
    const EvalOptions o = small_options();
    const auto disc = small_disc(o);
    PointCloud targets;
    targets.push_back(Vec3(0.01, 0.02, -0.03));
    const auto labels = mark_points(targets, *disc, 1e-6);
    REQUIRE(labels[0].zone == Zone::Far);
    DensityField phi(1, disc->coarse_nodes().size());
    for (std::size_t i = 0; i < phi.values.size(); ++i) phi.values[i] = disc->coarse_nodes().points.x[i];
    const auto a = evaluate_one_sided(KernelFamily::laplace(), Layer::Double, *disc, phi, targets, labels);
    const auto b = smooth_potential(KernelFamily::laplace(), Layer::Double, disc->coarse_nodes(), phi, targets);
    CHECK(a[0] == b[0]);
}

TEST_CASE("constant density through the one- and two-sided evaluators") {
    const EvalOptions o = small_options();
    const auto disc = small_disc(o);
    const std::size_t n = disc->coarse_nodes().size();
    const DensityField one(1, n, 1.0);
    const auto interior = evaluate_at_nodes(KernelFamily::laplace(), Layer::Double, *disc, one, {});
    const auto exterior =
        evaluate_at_nodes(KernelFamily::laplace(), Layer::Double, *disc, one, {}, Side::Exterior);
    const auto op = evaluate_two_sided(KernelFamily::laplace(), *disc, one);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(interior[i] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(std::abs(exterior[i]) < 1e-6);
        CHECK(op[i] == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("two-sided operator is linear") {
    EvalOptions o = small_options();
    o.q = 6;
    const auto disc = small_disc(o);
    const std::size_t n = disc->coarse_nodes().size();
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    const KernelFamily k = KernelFamily::stokes();
    DensityField x(3, n), y(3, n), z(3, n);
    for (std::size_t i = 0; i < 3 * n; ++i) {
        x.values[i] = u(rng);
        y.values[i] = u(rng);
        z.values[i] = 2.0 * x.values[i] - 0.5 * y.values[i];
    }
    const auto ax = evaluate_two_sided(k, *disc, x);
    const auto ay = evaluate_two_sided(k, *disc, y);
    const auto az = evaluate_two_sided(k, *disc, z);
    double worst = 0.0, size = 0.0;
    for (std::size_t i = 0; i < 3 * n; ++i) {
        worst = std::max(worst, std::abs(az[i] - (2.0 * ax[i] - 0.5 * ay[i])));
        size = std::max(size, std::abs(az[i]));
    }
    CHECK(worst <= 1e-9 * size);
}

TEST_CASE("two-sided average equals the principal value on a flat plate") {
    // The in-plane kernel (y - x) . n vanishes, so the dense quadrature of the principal
    // value at a plate point is exactly zero for any density.
    EvalOptions o;
    o.q = 16;
    o.b = 0.05;
    o.a = 0.05 / 6;
    PatchSet coarse = fitted(make_flat_rectangle(-0.5, -0.5, 1, 1, 0), 2);
    PatchSet fine = adaptive_upsample(coarse, o).patches;
    const Discretization disc(std::move(coarse), std::move(fine), o);
    const auto& nodes = disc.coarse_nodes();
    DensityField phi(1, nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        phi.values[i] = 1.0 + 0.3 * nodes.points.x[i] - 0.2 * nodes.points.y[i] * nodes.points.x[i];
    PointCloud oracle_targets;
    const std::vector<std::size_t> central = {7 * 16 + 8, 8 * 16 + 7, 8 * 16 + 8};
    for (std::size_t I : central) oracle_targets.push_back(nodes.position(I));
    const auto pv = smooth_potential(KernelFamily::laplace(), Layer::Double, disc.fine_nodes(),
                                     upsample_density(disc.upsampler(), phi), oracle_targets);
    const auto in = evaluate_at_nodes(KernelFamily::laplace(), Layer::Double, disc, phi, central);
    const auto out =
        evaluate_at_nodes(KernelFamily::laplace(), Layer::Double, disc, phi, central, Side::Exterior);
    for (std::size_t k = 0; k < central.size(); ++k) {
        CHECK(pv[k] == 0.0);
        CHECK(std::abs(0.5 * (in[k] + out[k]) - pv[k]) < 1e-6);
        CHECK(in[k] - out[k] == doctest::Approx(phi.values[central[k]]).epsilon(1e-6));
    }
}

TEST_CASE("Green's identity at near targets for all kernels") {
    EvalOptions o = small_options();
    o.q = 12;
    const auto disc = small_disc(o, 0.5, 1e-8);
    const auto& nodes = disc->coarse_nodes();
    std::mt19937_64 rng(10);
    PointCloud targets;
    for (int i = 0; i < 20; ++i) {
        const std::size_t I = rng() % nodes.size();
        const double depth = 0.01 + 0.2 * disc->coarse().length(nodes.patch[I]) * (i % 5);
        targets.push_back(nodes.position(I) - depth * nodes.normal(I));
    }
    for (const KernelFamily& k :
         {KernelFamily::laplace(), KernelFamily::stokes(), KernelFamily::elasticity(0.3)}) {
        const auto ref = ReferenceSolution::on_sphere(k, 10, 2);
        const int d = k.dim();
        DensityField u(d, nodes.size()), t(d, nodes.size());
        for (std::size_t I = 0; I < nodes.size(); ++I) {
            const auto ui = ref.value(nodes.position(I));
            const auto ti = ref.traction(nodes.position(I), nodes.normal(I));
            for (int a = 0; a < d; ++a) {
                u.values[I * d + a] = ui[a];
                t.values[I * d + a] = ti[a];
            }
        }
        const auto labels = mark_points(targets, *disc, 1e-10);
        const auto s = evaluate_one_sided(k, Layer::Single, *disc, t, targets, labels);
        const auto dl = evaluate_one_sided(k, Layer::Double, *disc, u, targets, labels);
        double err = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < targets.size(); ++j) {
            const auto exact = ref.value(targets.position(j));
            for (int a = 0; a < d; ++a) {
                err = std::max(err, std::abs(s[j * d + a] + dl[j * d + a] - exact[a]));
                scale = std::max(scale, std::abs(exact[a]));
            }
        }
        CHECK(err / scale < 1e-5);
    }
}

TEST_CASE("targets outside an interior domain are masked") {
    const EvalOptions o = small_options();
    const auto disc = small_disc(o);
    PointCloud targets;
    targets.push_back(Vec3(0.0, 0.0, 0.1));
    targets.push_back(Vec3(0.0, 0.0, 3.0));
    const auto labels = mark_points(targets, *disc, 1e-8);
    std::vector<char> mask;
    const DensityField one(1, disc->coarse_nodes().size(), 1.0);
    const auto v = evaluate_one_sided(KernelFamily::laplace(), Layer::Double, *disc, one, targets, labels,
                                      default_backend(), &mask);
    CHECK(mask[0] == 1);
    CHECK(mask[1] == 0);
    CHECK(v[1] == 0.0);
}

TEST_CASE("target files") {
    std::istringstream in("# header\n0 0 0\n\n  1.5 -2 3e-1  # trailing\n");
    const PointCloud t = read_targets(in);
    REQUIRE(t.size() == 2);
    CHECK(t.position(1) == Vec3(1.5, -2, 0.3));
    for (const char* bad : {"1 2\n", "1 2 3 4\n", "x y z\n"}) {
        std::istringstream b(bad);
        CHECK_THROWS_AS(read_targets(b), ParseError);
    }
    std::vector<ZoneLabel> labels(2);
    labels[0].inside = true;
    labels[1].zone = Zone::Near;
    const std::vector<double> v = {0.25, -1, 2, 3, 4, 5};
    std::ostringstream out;
    write_evaluations(out, t, labels, v, 3);
    CHECK(out.str() == "0 0 0 1 far 0.25 -1 2\n1.5 -2 0.29999999999999999 0 near 3 4 5\n");
    CHECK_THROWS_AS(write_evaluations(out, t, labels, v, 1), UsageError);
}

}  // TEST_SUITE
