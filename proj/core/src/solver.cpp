#include "hedgehog/solver.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <utility>

namespace hedgehog {

namespace {

// Point inside the closed surface (the complement of an exterior domain): walk from a
// node along its flipped normal until the winding number of the body is 1.
Vec3 find_completion_center(const Discretization& disc) {
    const QuadratureNodeSet& nodes = disc.coarse_nodes();
    const std::size_t mid = nodes.size() / 2;
    const double L = disc.coarse().length(nodes.patch[mid]);
    for (int k = 1; k <= 12; ++k) {
        const Vec3 x = nodes.position(mid) + std::ldexp(L, -k) * nodes.normal(mid);
        PointCloud probe;
        probe.push_back(x);
        std::vector<double> w(1, 0.0);
        default_backend().evaluate(KernelFamily::laplace(), Layer::Double, nodes.points,
                                   nodes.weight, probe, w, false);
        // flipped normals: D[1] = -winding(body)
        if (std::abs(-w[0] - 1.0) < 1e-6) return x;
    }
    throw UsageError("could not find a point inside the surface for the exterior completion");
}

}  // namespace

Assembly assemble_from_patches(const BVProblem& problem, PatchSet coarse) {
    Assembly out;
    PatchSet fine(PatchRole::Fine);
    if (problem.uniform_levels >= 0) {
        fine = uniform_upsample(coarse, problem.uniform_levels);
    } else {
        RefinementResult up = adaptive_upsample(coarse, problem.eval, problem.upsampling);
        fine = std::move(up.patches);
        out.reports.push_back(std::move(up.report));
    }
    out.disc = std::make_unique<Discretization>(std::move(coarse), std::move(fine), problem.eval);
    if (problem.data.dim != problem.kernel.dim())
        throw UsageError("boundary data dimension does not match the kernel");
    out.rhs = sample(out.disc->coarse_nodes(), problem.data);
    if (problem.side == Side::Exterior)
        out.completion_center = problem.completion_center ? *problem.completion_center
                                                          : find_completion_center(*out.disc);
    return out;
}

Assembly assemble(const BVProblem& problem) {
    problem.eval.validate();
    if (problem.side == Side::Exterior && problem.kernel.family != Family::Laplace)
        throw UsageError("exterior problems are supported for the Laplace kernel only");
    if (!problem.data.evaluator) throw UsageError("problem has no boundary data");
    const QuadMesh mesh = problem.side == Side::Exterior ? problem.geometry.flipped()
                                                         : problem.geometry;
    const AdmissibilityConfig& adm = problem.admissibility;
    std::vector<RefinementReport> reports;

    RefinementResult geo =
        refine_for_geometry(mesh, problem.degree, adm.eps_g, adm.max_depth, adm.min_length);
    reports.push_back(std::move(geo.report));
    PatchSet set = std::move(geo.patches);
    if (problem.refine_for_data) {
        RefinementResult data = refine_for_boundary_condition(set, problem.data, adm.eps_f,
                                                              problem.eval.q, adm.max_depth,
                                                              adm.min_length);
        reports.push_back(std::move(data.report));
        set = std::move(data.patches);
    }
    AdmissibilityConfig cfg = adm;
    cfg.check = problem.eval;
    RefinementResult admissible = enforce_admissibility(set, cfg);
    reports.push_back(std::move(admissible.report));

    Assembly out = assemble_from_patches(problem, std::move(admissible.patches));
    reports.insert(reports.end(), out.reports.begin(), out.reports.end());
    out.reports = std::move(reports);
    return out;
}

BoundaryOperator::BoundaryOperator(const KernelFamily& kernel, const Discretization& disc,
                                   std::optional<Vec3> completion_center,
                                   const SummationBackend& backend)
    : kernel_(kernel), disc_(&disc), center_(completion_center), backend_(&backend),
      stencil_(surface_stencil(disc, true)) {
    if (center_ && kernel_.family != Family::Laplace)
        throw UsageError("the constant-charge completion applies to the Laplace kernel only");
}

void BoundaryOperator::apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != size() || y.size() != size()) throw UsageError("operator size mismatch");
    DensityField density(kernel_.dim(), disc_->coarse_nodes().size());
    std::copy(x.begin(), x.end(), density.values.begin());
    const auto values = evaluate_two_sided(kernel_, *disc_, stencil_, density, *backend_);
    std::copy(values.begin(), values.end(), y.begin());
    if (center_) {
        const QuadratureNodeSet& nodes = disc_->coarse_nodes();
        double total = 0.0;
        for (std::size_t J = 0; J < nodes.size(); ++J) total += x[J] * nodes.weight[J];
        for (std::size_t I = 0; I < nodes.size(); ++I)
            y[I] += detail::inv4pi * total / (nodes.position(I) - *center_).norm();
    }
}

Eigen::MatrixXd BoundaryOperator::assemble_dense() const {
    const QuadratureNodeSet& coarse = disc_->coarse_nodes();
    const QuadratureNodeSet& fine = disc_->fine_nodes();
    const Upsampler& up = disc_->upsampler();
    const int dim = kernel_.dim();
    const std::size_t n = coarse.size();
    const std::size_t patches = disc_->coarse().size();
    const int q = disc_->options().q;
    const std::size_t qq = static_cast<std::size_t>(q) * q;
    const std::size_t per_patch = qq * dim;
    const int per = stencil_.per_side;
    const int checks = stencil_.sides * per;
    if (checks > 32) throw UsageError("dense assembly takes at most 32 check points per node");
    // two-sided average: each limit enters with weight 1/2
    std::vector<double> coeff(checks);
    for (int side = 0; side < stencil_.sides; ++side)
        for (int s = 0; s < per; ++s)
            coeff[side * per + s] = (stencil_.sides == 2 ? 0.5 : 1.0) * stencil_.weights[s];

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * dim),
                                              static_cast<Eigen::Index>(n * dim));
    const double nu = kernel_.poisson_ratio;
    const double traction_scale = 0.5 * detail::inv4pi / (1.0 - nu);

    // g[(d * qq + J) * dim + e] = sum over the listed checks of coeff_c K_de(c, y_J) w_J,
    // for the qq nodes of one patch starting at `first`
    auto patch_block = [&](const QuadratureNodeSet& nodes, std::size_t first, const double* cx,
                           const double* cy, const double* cz, const double* cc, int nc,
                           double* g) {
        const double* px = nodes.points.x.data() + first;
        const double* py = nodes.points.y.data() + first;
        const double* pz = nodes.points.z.data() + first;
        const double* pnx = nodes.points.nx.data() + first;
        const double* pny = nodes.points.ny.data() + first;
        const double* pnz = nodes.points.nz.data() + first;
        const double* pw = nodes.weight.data() + first;
        if (kernel_.family == Family::Laplace) {
#pragma omp simd
            for (std::size_t J = 0; J < qq; ++J) {
                double acc = 0.0;
                for (int c = 0; c < nc; ++c) {
                    const double dx = px[J] - cx[c], dy = py[J] - cy[c], dz = pz[J] - cz[c];
                    const double inv = 1.0 / std::sqrt(dx * dx + dy * dy + dz * dz);
                    acc += cc[c] * (dx * pnx[J] + dy * pny[J] + dz * pnz[J]) * inv * inv * inv;
                }
                g[J] = detail::inv4pi * pw[J] * acc;
            }
            return;
        }
        for (std::size_t J = 0; J < qq; ++J) {
            double block[3][3] = {};
            const double nrm[3] = {pnx[J], pny[J], pnz[J]};
            for (int c = 0; c < nc; ++c) {
                const double d[3] = {px[J] - cx[c], py[J] - cy[c], pz[J] - cz[c]};
                const double inv = 1.0 / std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
                for (int e = 0; e < 3; ++e) {
                    double unit[3] = {0.0, 0.0, 0.0};
                    unit[e] = cc[c];
                    double col[3] = {0.0, 0.0, 0.0};
                    if (kernel_.family == Family::Stokes)
                        detail::stokes_double_acc(d, nrm, inv, unit, col);
                    else
                        detail::elasticity_double_acc(traction_scale, 1.0 - 2.0 * nu, d, nrm, inv,
                                                      unit, col);
                    for (int dd = 0; dd < 3; ++dd) block[dd][e] += col[dd];
                }
            }
            for (int dd = 0; dd < 3; ++dd)
                for (int e = 0; e < 3; ++e) g[(dd * qq + J) * dim + e] = pw[J] * block[dd][e];
        }
    };

    using Kind = QuadratureTreeNode::Kind;
    const auto& tree = disc_->tree();
    const long rows = static_cast<long>(n);
#pragma omp parallel
    {
        std::vector<double> g(static_cast<std::size_t>(dim) * per_patch);
        std::vector<double> row(static_cast<std::size_t>(dim) * n * dim);
        std::vector<Vec3> pos(checks);
        std::vector<double> sx(checks), sy(checks), sz(checks), sc(checks);
        std::vector<std::pair<std::size_t, std::uint32_t>> stack;
        // adds the contribution of one tree node seen from the checks in `mask`
        auto add = [&](std::size_t root, Kind kind, std::size_t patch, std::uint32_t mask) {
            int m = 0;
            for (int c = 0; c < checks; ++c) {
                if (!(mask >> c & 1u)) continue;
                sx[m] = pos[c].x();
                sy[m] = pos[c].y();
                sz[m] = pos[c].z();
                sc[m] = coeff[c];
                ++m;
            }
            const QuadratureNodeSet& nodes = kind == Kind::Coarse     ? coarse
                                             : kind == Kind::Internal ? disc_->internal_nodes()
                                                                      : fine;
            patch_block(nodes, patch * qq, sx.data(), sy.data(), sz.data(), sc.data(), m, g.data());
            for (int d = 0; d < dim; ++d) {
                double* rd = row.data() + static_cast<std::size_t>(d) * n * dim + root * per_patch;
                const double* gd = g.data() + d * per_patch;
                if (kind == Kind::Coarse)
                    for (std::size_t j = 0; j < per_patch; ++j) rd[j] += gd[j];
                else if (kind == Kind::Internal)
                    disc_->internal_upsampler().apply_transpose_patch(patch, gd, rd, dim);
                else
                    up.apply_transpose_patch(patch, gd, rd, dim);
            }
        };
#pragma omp for schedule(dynamic, 4)
        for (long I = 0; I < rows; ++I) {
            for (int c = 0; c < checks; ++c)
                pos[c] = stencil_.points.position(static_cast<std::size_t>(I) * checks + c);
            std::fill(row.begin(), row.end(), 0.0);
            const std::uint32_t all = checks == 32 ? ~0u : (1u << checks) - 1u;
            for (std::size_t root = 0; root < patches; ++root) {
                stack.emplace_back(root, all);
                while (!stack.empty()) {
                    const auto [id, mask] = stack.back();
                    stack.pop_back();
                    const QuadratureTreeNode& node = tree[id];
                    if (node.first_child < 0 && node.kind == Kind::Fine) {
                        add(root, Kind::Fine, node.index, mask);
                        continue;
                    }
                    std::uint32_t far = 0, near = 0;
                    for (int c = 0; c < checks; ++c)
                        if (mask >> c & 1u) (node.box.contains(pos[c]) ? near : far) |= 1u << c;
                    if (far) add(root, node.kind, node.index, far);
                    if (!near) continue;
                    if (node.first_child < 0) {
                        add(root, Kind::Fine, node.leaf, near);
                        continue;
                    }
                    for (int k = 0; k < 4; ++k)
                        stack.emplace_back(static_cast<std::size_t>(node.first_child + k), near);
                }
            }
            for (int d = 0; d < dim; ++d) {
                const Eigen::Index r = static_cast<Eigen::Index>(I * dim + d);
                const double* rd = row.data() + static_cast<std::size_t>(d) * n * dim;
                for (std::size_t j = 0; j < n * dim; ++j) A(r, static_cast<Eigen::Index>(j)) = rd[j];
                A(r, r) += 0.5;
            }
            if (center_) {
                const double green = detail::inv4pi / (coarse.position(I) - *center_).norm();
                for (std::size_t J = 0; J < n; ++J)
                    A(I, static_cast<Eigen::Index>(J)) += green * coarse.weight[J];
            }
        }
    }
    return A;
}

Eigen::MatrixXd BoundaryOperator::assemble_columns() const {
    const std::size_t m = size();
    Eigen::MatrixXd A(m, m);
    std::vector<double> e(m, 0.0), col(m);
    for (std::size_t j = 0; j < m; ++j) {
        e[j] = 1.0;
        apply(e, col);
        e[j] = 0.0;
        for (std::size_t i = 0; i < m; ++i) A(i, j) = col[i];
    }
    return A;
}

Solution solve(const BVProblem& problem, Assembly assembly) {
    const auto start = std::chrono::steady_clock::now();
    const BoundaryOperator op(problem.kernel, *assembly.disc, assembly.completion_center);
    GmresResult gm;
    if (problem.dense_operator) {
        const Eigen::MatrixXd A = op.assemble_dense();
        gm = gmres(
            [&A](std::span<const double> x, std::span<double> y) {
                Eigen::Map<Eigen::VectorXd>(y.data(), y.size()).noalias() =
                    A * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
            },
            assembly.rhs.values, problem.gmres_tolerance, problem.max_iterations);
    } else {
        gm = gmres([&op](std::span<const double> x, std::span<double> y) { op.apply(x, y); },
                   assembly.rhs.values, problem.gmres_tolerance, problem.max_iterations);
    }
    Solution sol;
    sol.density = DensityField(problem.kernel.dim(), assembly.disc->coarse_nodes().size());
    sol.density.values = std::move(gm.x);
    sol.report.iterations = gm.iterations;
    sol.report.residual = gm.residual;
    sol.report.converged = gm.converged;
    sol.report.history = std::move(gm.history);
    sol.report.coarse_patches = assembly.disc->coarse().size();
    sol.report.fine_patches = assembly.disc->fine().size();
    sol.report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    sol.assembly = std::move(assembly);
    return sol;
}

Solution solve(const BVProblem& problem) { return solve(problem, assemble(problem)); }

FieldEvaluation evaluate_field(const KernelFamily& kernel, const Assembly& assembly,
                               const DensityField& density, const PointCloud& targets,
                               const SummationBackend& backend) {
    FieldEvaluation field;
    if (targets.size() == 0) return field;
    const Discretization& disc = *assembly.disc;
    field.labels = mark_points(targets, disc, disc.options().eps_target, backend);
    field.values = evaluate_one_sided(kernel, Layer::Double, disc, density, targets, field.labels,
                                      backend, &field.inside);
    if (assembly.completion_center) {
        const QuadratureNodeSet& nodes = disc.coarse_nodes();
        double total = 0.0;
        for (std::size_t J = 0; J < nodes.size(); ++J) total += density.values[J] * nodes.weight[J];
        for (std::size_t i = 0; i < targets.size(); ++i)
            if (field.inside[i])
                field.values[i] += detail::inv4pi * total /
                                   (targets.position(i) - *assembly.completion_center).norm();
    }
    return field;
}

std::vector<double> evaluate_solution(const KernelFamily& kernel, const Assembly& assembly,
                                      const DensityField& density, const PointCloud& targets,
                                      std::vector<char>* inside_mask,
                                      const SummationBackend& backend) {
    FieldEvaluation field = evaluate_field(kernel, assembly, density, targets, backend);
    if (inside_mask) *inside_mask = std::move(field.inside);
    return std::move(field.values);
}

}  // namespace hedgehog
