#include "hedgehog/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hedgehog {

ClenshawCurtisRule cc_rule(int q) {
    if (q < 2) throw UsageError("Clenshaw-Curtis rule needs q >= 2");
    const int n = q - 1;
    ClenshawCurtisRule rule;
    rule.q = q;
    rule.nodes.resize(q);
    rule.weights.resize(q);
    for (int j = 0; j <= n; ++j) {
        const double theta = std::numbers::pi * j / n;
        double sum = 0.0;
        for (int k = 1; 2 * k <= n; ++k) {
            const double b = (2 * k == n) ? 1.0 : 2.0;
            sum += b / (4.0 * k * k - 1.0) * std::cos(2.0 * k * theta);
        }
        const double c = (j == 0 || j == n) ? 1.0 : 2.0;
        // j runs over descending nodes cos(theta); store ascending
        rule.nodes[n - j] = std::cos(theta);
        rule.weights[n - j] = c / n * (1.0 - sum);
    }
    // enforce exact symmetry
    for (int j = 0; j < q / 2; ++j) {
        const double x = 0.5 * (rule.nodes[q - 1 - j] - rule.nodes[j]);
        rule.nodes[j] = -x;
        rule.nodes[q - 1 - j] = x;
        const double w = 0.5 * (rule.weights[j] + rule.weights[q - 1 - j]);
        rule.weights[j] = rule.weights[q - 1 - j] = w;
    }
    if (q % 2 == 1) rule.nodes[q / 2] = 0.0;
    return rule;
}

std::vector<double> chebyshev_barycentric_weights(int q) {
    std::vector<double> w(q);
    for (int j = 0; j < q; ++j) {
        w[j] = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == q - 1) w[j] *= 0.5;
    }
    return w;
}

std::vector<double> chebyshev_interpolation_matrix(int q, const std::vector<double>& points) {
    const auto nodes = cc_rule(q).nodes;
    const auto w = chebyshev_barycentric_weights(q);
    const std::size_t m = points.size();
    std::vector<double> mat(m * q, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = points[i];
        double* row = mat.data() + i * q;
        int hit = -1;
        for (int j = 0; j < q; ++j) {
            if (x == nodes[j]) {
                hit = j;
                break;
            }
        }
        if (hit >= 0) {
            row[hit] = 1.0;
            continue;
        }
        double denom = 0.0;
        for (int j = 0; j < q; ++j) {
            row[j] = w[j] / (x - nodes[j]);
            denom += row[j];
        }
        for (int j = 0; j < q; ++j) row[j] /= denom;
    }
    return mat;
}

double quadrature_error_heuristic(double h, int k, int q, double variation) {
    if (k < 1) throw UsageError("smoothness index k must be >= 1");
    if (k >= 2 * q + 1) throw UsageError("heuristic requires k < 2q + 1");
    if (!(h > 0.0)) throw UsageError("h must be positive");
    return 128.0 * std::pow(h, k + 1) * variation /
           (15.0 * std::numbers::pi * k * std::pow(2.0 * q + 1.0 - k, k));
}

}  // namespace hedgehog

namespace hedgehog {

QuadratureNodeSet discretize(const PatchSet& set, int q) {
    const auto rule = cc_rule(q);
    const std::size_t per = static_cast<std::size_t>(q) * q;
    const std::size_t total = per * set.size();
    QuadratureNodeSet nodes;
    nodes.q = q;
    auto& pts = nodes.points;
    for (auto* v : {&pts.x, &pts.y, &pts.z, &pts.nx, &pts.ny, &pts.nz, &nodes.weight, &nodes.s,
                    &nodes.t})
        v->resize(total);
    nodes.patch.resize(total);
    const long count = static_cast<long>(set.size());
    bool degenerate = false;
#pragma omp parallel for schedule(dynamic, 4) reduction(|| : degenerate)
    for (long i = 0; i < count; ++i) {
        std::vector<Vec3> pos, ds, dt;
        const SurfacePatch& patch = set[i];
        patch.shape.sample_grid(rule.nodes, rule.nodes, pos, &ds, &dt);
        for (int a = 0; a < q; ++a) {
            for (int b = 0; b < q; ++b) {
                const std::size_t local = static_cast<std::size_t>(a) * q + b;
                const std::size_t I = i * per + local;
                const Vec3 c = ds[local].cross(dt[local]);
                const double area = c.norm();
                if (!(area > 0.0)) degenerate = true;
                const Vec3 n = (patch.orientation / area) * c;
                pts.x[I] = pos[local].x();
                pts.y[I] = pos[local].y();
                pts.z[I] = pos[local].z();
                pts.nx[I] = n.x();
                pts.ny[I] = n.y();
                pts.nz[I] = n.z();
                nodes.weight[I] = area * rule.weights[a] * rule.weights[b];
                nodes.patch[I] = static_cast<int>(i);
                nodes.s[I] = rule.nodes[a];
                nodes.t[I] = rule.nodes[b];
            }
        }
    }
    if (degenerate) throw SingularParametrization("zero metric at a quadrature node");
    return nodes;
}

DensityField sample(const QuadratureNodeSet& nodes, const BoundaryCondition& f) {
    DensityField phi(f.dim, nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Eigen::VectorXd v = f(nodes.position(i));
        if (v.size() != f.dim) throw UsageError("boundary condition returned wrong dimension");
        for (int k = 0; k < f.dim; ++k) phi.values[i * f.dim + k] = v[k];
    }
    return phi;
}

std::vector<double> weighted_strengths(const QuadratureNodeSet& nodes,
                                       const DensityField& density) {
    if (density.nodes() != nodes.size()) throw UsageError("density does not match node set");
    std::vector<double> str(density.values.size());
    const int d = density.dim;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (int k = 0; k < d; ++k) str[i * d + k] = density.values[i * d + k] * nodes.weight[i];
    return str;
}

std::vector<double> smooth_potential(const KernelFamily& kernel, Layer layer,
                                     const QuadratureNodeSet& nodes, const DensityField& density,
                                     const PointCloud& targets, const SummationBackend& backend) {
    if (density.dim != kernel.dim()) throw UsageError("density dimension does not match kernel");
    const auto str = weighted_strengths(nodes, density);
    std::vector<double> out(kernel.dim() * targets.size(), 0.0);
    if (targets.size() == 0) return out;
    backend.evaluate(kernel, layer, nodes.points, str, targets, out, false);
    return out;
}

}  // namespace hedgehog
