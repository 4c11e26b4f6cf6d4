#include "hedgehog/refinement.hpp"

#include "hedgehog/clenshaw_curtis.hpp"
#include "hedgehog/quadrature.hpp"
#include "hedgehog/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace hedgehog {

void RefinementReport::write(std::ostream& out) const {
    out << "# " << stage << "\n";
    out << "sweep patches refined max_length min_length offending\n";
    for (const RefinementSweep& s : sweeps) {
        out << s.sweep << ' ' << s.patches << ' ' << s.refined << ' ' << s.max_length << ' '
            << s.min_length;
        for (std::size_t k = 0; k < s.offending.size(); ++k) out << (k ? ',' : ' ') << s.offending[k];
        out << '\n';
    }
    if (!unresolved.empty()) {
        out << "unresolved";
        for (int id : unresolved) out << ' ' << id;
        out << '\n';
    }
}

namespace {

// A patch in a refinement tree: `origin` indexes the input quad or patch, `path` is
// the sequence of quadrants taken from it. Sorting by (origin, path) gives a stable
// depth-first order for the output set.
struct Node {
    SurfacePatch patch;
    int origin = 0;
    std::string path;
    double length = 0.0;
};

bool tree_order(const Node& x, const Node& y) {
    return x.origin != y.origin ? x.origin < y.origin : x.path < y.path;
}

RefinementSweep sweep_stats(int sweep, const std::vector<Node>& nodes,
                            const std::vector<char>& split) {
    RefinementSweep s;
    s.sweep = sweep;
    s.patches = nodes.size();
    s.max_length = 0.0;
    s.min_length = nodes.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        s.max_length = std::max(s.max_length, nodes[i].length);
        s.min_length = std::min(s.min_length, nodes[i].length);
        if (split[i]) {
            ++s.refined;
            s.offending.push_back(static_cast<int>(i));
        }
    }
    return s;
}

std::string describe_ids(const std::string& what, const std::vector<int>& ids) {
    std::ostringstream msg;
    msg << what << ":";
    for (std::size_t k = 0; k < ids.size() && k < 16; ++k) msg << ' ' << ids[k];
    if (ids.size() > 16) msg << " ... (" << ids.size() << " total)";
    return msg.str();
}

// Sorts finished nodes into tree order and records the min_length-limited ones.
RefinementResult finish(RefinementResult result, std::vector<Node>& done,
                        const std::vector<char>& limited) {
    std::vector<std::size_t> order(done.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return tree_order(done[x], done[y]); });
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (limited[order[k]]) result.report.unresolved.push_back(static_cast<int>(k));
        result.patches.add(std::move(done[order[k]].patch));
    }
    return result;
}

// Shared sweep loop. `needs_split(nodes, flags)` fills one flag per node; flagged
// nodes are quadrisected unless limited by min_length or max_depth.
template <class Test>
RefinementResult refine_loop(std::vector<Node> nodes, const std::string& stage, int max_depth,
                             double min_length, PatchRole role, Test&& needs_split) {
    RefinementResult result{PatchSet(role), {}};
    result.report.stage = stage;
    std::vector<Node> done;
    std::vector<char> limited;
    for (int sweep = 0; !nodes.empty(); ++sweep) {
        std::vector<char> split(nodes.size(), 0);
        needs_split(nodes, split);
        result.report.sweeps.push_back(sweep_stats(sweep, nodes, split));
        std::vector<Node> next;
        std::vector<int> too_deep;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            Node& node = nodes[i];
            const bool limit = split[i] && 0.5 * node.length < min_length;
            if (!split[i] || limit) {
                done.push_back(std::move(node));
                limited.push_back(limit ? 1 : 0);
                continue;
            }
            if (node.patch.depth >= max_depth) {
                too_deep.push_back(static_cast<int>(i));
                continue;
            }
            auto children = node.patch.quadrisect();
            for (int k = 0; k < 4; ++k) {
                Node child{std::move(children[k]), node.origin, node.path + char('0' + k), 0.0};
                child.length = characteristic_length(child.patch);
                next.push_back(std::move(child));
            }
        }
        if (!too_deep.empty())
            throw RefinementError(describe_ids(stage + ": depth cap reached in sweep " +
                                                   std::to_string(sweep) + " for patches",
                                               too_deep));
        nodes = std::move(next);
    }
    return finish(std::move(result), done, limited);
}

std::vector<Node> nodes_from_set(const PatchSet& set) {
    std::vector<Node> nodes(set.size());
    for (std::size_t i = 0; i < set.size(); ++i)
        nodes[i] = {set[i], static_cast<int>(i), std::string(), set.length(i)};
    return nodes;
}

}  // namespace

RefinementResult refine_for_geometry(const QuadMesh& mesh, int degree, double eps_g,
                                     int max_depth, double min_length) {
    if (mesh.size() == 0) throw UsageError("empty quad mesh");
    if (!(eps_g > 0.0)) throw UsageError("eps_g must be positive");
    // Fits are computed inside the split test; a node's patch is replaced by its own
    // fit, and children are refitted from gamma rather than subdivided.
    std::vector<Node> nodes;
    for (std::size_t r = 0; r < mesh.size(); ++r) {
        Node n;
        n.origin = static_cast<int>(r);
        n.patch.root = static_cast<int>(r);
        n.patch.orientation = mesh.orientation;
        nodes.push_back(std::move(n));
    }

    RefinementResult result{PatchSet(PatchRole::Coarse), {}};
    result.report.stage = "geometry (criterion 1)";
    std::vector<Node> done;
    std::vector<char> limited;
    for (int sweep = 0; !nodes.empty(); ++sweep) {
        std::vector<char> split(nodes.size(), 0);
        const long count = static_cast<long>(nodes.size());
#pragma omp parallel for schedule(dynamic, 1)
        for (long i = 0; i < count; ++i) {
            Node& node = nodes[i];
            const SurfacePatch& shell = node.patch;
            double error = std::numeric_limits<double>::infinity();
            try {
                FitResult fit = fit_patch(mesh.quads[shell.root], shell.domain, degree, shell.root,
                                          shell.depth, mesh.orientation);
                error = fit.error;
                node.patch = std::move(fit.patch);
                node.length = characteristic_length(node.patch);
            } catch (const FittingError&) {
                node.length = std::numeric_limits<double>::infinity();
            }
            split[i] = !(error < eps_g);
        }
        result.report.sweeps.push_back(sweep_stats(sweep, nodes, split));
        std::vector<Node> next;
        std::vector<int> too_deep;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            Node& node = nodes[i];
            const bool limit = split[i] && std::isfinite(node.length) && 0.5 * node.length < min_length;
            if (!split[i] || limit) {
                done.push_back(std::move(node));
                limited.push_back(limit ? 1 : 0);
                continue;
            }
            if (node.patch.depth >= max_depth) {
                too_deep.push_back(static_cast<int>(i));
                continue;
            }
            for (int k = 0; k < 4; ++k) {
                Node child;
                child.origin = node.origin;
                child.path = node.path + char('0' + k);
                child.patch.root = node.patch.root;
                child.patch.domain = node.patch.domain.child(k);
                child.patch.depth = node.patch.depth + 1;
                child.patch.orientation = mesh.orientation;
                next.push_back(std::move(child));
            }
        }
        if (!too_deep.empty())
            throw RefinementError(describe_ids("geometry fit did not reach eps_g at the depth cap "
                                               "(sweep " + std::to_string(sweep) + " ids)",
                                               too_deep));
        nodes = std::move(next);
    }
    return finish(std::move(result), done, limited);
}

RefinementResult refine_for_boundary_condition(const PatchSet& set, const BoundaryCondition& f,
                                               double eps_f, int q, int max_depth,
                                               double min_length) {
    if (!(eps_f > 0.0)) throw UsageError("eps_f must be positive");
    if (!f.evaluator) throw UsageError("boundary condition has no evaluator");
    const auto rule = cc_rule(q);
    const int m = 2 * q;
    std::vector<double> check(m);
    for (int i = 0; i < m; ++i) check[i] = -1.0 + 2.0 * i / (m - 1);
    const std::vector<double> interp = chebyshev_interpolation_matrix(q, check);

    auto sample_patch = [&](const SurfacePatch& patch, std::span<const double> s,
                            std::span<const double> t) {
        std::vector<Vec3> pos;
        patch.shape.sample_grid(s, t, pos);
        Eigen::MatrixXd values(f.dim, pos.size());
        for (std::size_t k = 0; k < pos.size(); ++k) {
            const Eigen::VectorXd v = f(pos[k]);
            if (v.size() != f.dim) throw UsageError("boundary condition returned wrong dimension");
            values.col(k) = v;
        }
        return values;
    };

    // reference magnitude of f, fixed from the input patches
    double scale = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i)
        scale = std::max(scale, sample_patch(set[i], rule.nodes, rule.nodes).cwiseAbs().maxCoeff());
    if (!(scale > 0.0)) scale = 1.0;
    const double tol = eps_f * scale;

    return refine_loop(
        nodes_from_set(set), "boundary condition (criterion 2)", max_depth, min_length,
        set.role(), [&](const std::vector<Node>& nodes, std::vector<char>& split) {
            const long count = static_cast<long>(nodes.size());
#pragma omp parallel for schedule(dynamic, 1)
            for (long i = 0; i < count; ++i) {
                const SurfacePatch& patch = nodes[i].patch;
                const Eigen::MatrixXd at_nodes = sample_patch(patch, rule.nodes, rule.nodes);
                const Eigen::MatrixXd exact = sample_patch(patch, check, check);
                double err = 0.0;
                for (int k = 0; k < f.dim; ++k) {
                    // tensor interpolation: V = I * F * I^T with F indexed (s, t)
                    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                   Eigen::RowMajor>>
                        I(interp.data(), m, q);
                    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> F(q, q);
                    for (int a = 0; a < q; ++a)
                        for (int b = 0; b < q; ++b) F(a, b) = at_nodes(k, a * q + b);
                    const Eigen::MatrixXd V = I * F * I.transpose();
                    for (int a = 0; a < m; ++a)
                        for (int b = 0; b < m; ++b)
                            err = std::max(err, std::abs(V(a, b) - exact(k, a * m + b)));
                }
                split[i] = !(err < tol);
            }
        });
}

namespace {

struct AdmissibilityContext {
    const PatchSet& set;
    SurfaceIndex index;
    std::vector<BoundingBox> boxes;
    ClenshawCurtisRule rule;

    AdmissibilityContext(const PatchSet& s, int q) : set(s), index(s), rule(cc_rule(q)) {
        boxes.reserve(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) boxes.push_back(patch_box(s[i].shape));
    }
};

bool admissible(const AdmissibilityContext& ctx, std::size_t i, const AdmissibilityConfig& cfg) {
    const SurfacePatch& patch = ctx.set[i];
    const double D = cfg.check.center_distance(ctx.set.length(i));
    const double bound = D - (cfg.eps_opt + cfg.eps_g);
    std::vector<Vec3> pos, ds, dt;
    patch.shape.sample_grid(ctx.rule.nodes, ctx.rule.nodes, pos, &ds, &dt);
    const Side sides[2] = {Side::Interior, Side::Exterior};
    const int nsides = cfg.two_sided ? 2 : 1;
    for (std::size_t k = 0; k < pos.size(); ++k) {
        const Vec3 n = (patch.orientation * ds[k].cross(dt[k])).normalized();
        for (int side = 0; side < nsides; ++side) {
            const Vec3 center = pos[k] + side_sign(sides[side]) * D * n;
            for (int id : ctx.index.box_tree().query_box(BoundingBox::around(center, D))) {
                if (ctx.boxes[id].squared_distance(center) >= bound * bound) continue;
                const PatchProjection proj =
                    closest_point_on_patch(ctx.set[id].shape, center, cfg.eps_opt);
                if (proj.distance < bound) return false;
            }
        }
    }
    return true;
}

}  // namespace

bool patch_is_admissible(const PatchSet& set, std::size_t i, const AdmissibilityConfig& cfg) {
    cfg.check.validate();
    const AdmissibilityContext ctx(set, cfg.check.q);
    return admissible(ctx, i, cfg);
}

RefinementResult enforce_admissibility(const PatchSet& set, const AdmissibilityConfig& cfg) {
    cfg.check.validate();
    if (set.empty()) throw UsageError("admissibility of an empty patch set");
    return refine_loop(
        nodes_from_set(set), "admissibility (criterion 3)", cfg.max_depth, cfg.min_length,
        set.role(), [&](const std::vector<Node>& nodes, std::vector<char>& split) {
            PatchSet current(set.role());
            for (const Node& n : nodes) current.add(n.patch);
            const AdmissibilityContext ctx(current, cfg.check.q);
            const long count = static_cast<long>(nodes.size());
#pragma omp parallel for schedule(dynamic, 1)
            for (long i = 0; i < count; ++i) split[i] = admissible(ctx, i, cfg) ? 0 : 1;
        });
}

std::vector<Vec3> operator_check_points(const PatchSet& coarse, const EvalOptions& opts,
                                        bool two_sided) {
    opts.validate();
    const QuadratureNodeSet nodes = discretize(coarse, opts.q);
    const int nsides = two_sided ? 2 : 1;
    const int per = opts.p + 1;
    std::vector<Vec3> points(nodes.size() * nsides * per);
    for (std::size_t I = 0; I < nodes.size(); ++I) {
        const double L = coarse.length(nodes.patch[I]);
        const double R = opts.first_distance(L), r = opts.spacing(L);
        const Vec3 y = nodes.position(I), n = nodes.normal(I);
        for (int side = 0; side < nsides; ++side) {
            const double sign = side_sign(side == 0 ? Side::Interior : Side::Exterior);
            for (int s = 0; s < per; ++s)
                points[(I * nsides + side) * per + s] = y + sign * (R + s * r) * n;
        }
    }
    return points;
}

RefinementResult adaptive_upsample(const PatchSet& coarse, const EvalOptions& opts,
                                   const UpsamplingConfig& cfg) {
    if (cfg.n_skip < 0) throw UsageError("n_skip must be >= 0");
    if (coarse.empty()) throw UsageError("upsampling an empty patch set");
    const std::vector<Vec3> checks = operator_check_points(coarse, opts, cfg.two_sided);

    RefinementResult result{PatchSet(PatchRole::Fine), {}};
    result.report.stage = "adaptive upsampling";
    std::vector<SurfacePatch> fine(coarse.patches());
    std::vector<int> parent(coarse.size());
    std::vector<double> length(coarse.lengths());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);

    std::vector<int> near(checks.size());
    for (std::size_t c = 0; c < near.size(); ++c) near[c] = static_cast<int>(c);

    for (int sweep = 0; !near.empty(); ++sweep) {
        std::vector<std::pair<BoundingBox, int>> items;
        items.reserve(fine.size());
        for (std::size_t i = 0; i < fine.size(); ++i)
            items.emplace_back(near_zone_box(fine[i], length[i]), static_cast<int>(i));
        const AabbTree tree = AabbTree::build(std::move(items), PayloadKind::NearZoneBox);
        std::vector<BoundingBox> hulls(fine.size());
        for (std::size_t i = 0; i < fine.size(); ++i) hulls[i] = patch_box(fine[i].shape);

        const bool skip_newton = sweep < cfg.n_skip;
        std::vector<char> split(fine.size(), 0);
        std::vector<char> still_near(near.size(), 0);
        const long count = static_cast<long>(near.size());
#pragma omp parallel for schedule(dynamic, 64)
        for (long k = 0; k < count; ++k) {
            const Vec3& c = checks[near[k]];
            for (int id : tree.query_point(c)) {
                bool close = true;
                if (!skip_newton) {
                    const double L = length[id];
                    close = hulls[id].squared_distance(c) < L * L &&
                            closest_point_on_patch(fine[id].shape, c).distance < L;
                }
                if (close) {
#pragma omp atomic write
                    split[id] = 1;
                    still_near[k] = 1;
                }
            }
        }

        result.report.sweeps.push_back({sweep, fine.size(), 0, 0.0,
                                        std::numeric_limits<double>::infinity(), {}});
        RefinementSweep& stats = result.report.sweeps.back();
        std::vector<SurfacePatch> next;
        std::vector<int> next_parent;
        std::vector<double> next_length;
        std::vector<int> too_deep;
        for (std::size_t i = 0; i < fine.size(); ++i) {
            stats.max_length = std::max(stats.max_length, length[i]);
            stats.min_length = std::min(stats.min_length, length[i]);
            if (!split[i]) {
                next.push_back(std::move(fine[i]));
                next_parent.push_back(parent[i]);
                next_length.push_back(length[i]);
                continue;
            }
            ++stats.refined;
            stats.offending.push_back(static_cast<int>(i));
            if (fine[i].depth >= cfg.max_depth) {
                too_deep.push_back(static_cast<int>(i));
                continue;
            }
            for (auto& child : fine[i].quadrisect()) {
                next_length.push_back(characteristic_length(child));
                next.push_back(std::move(child));
                next_parent.push_back(parent[i]);
            }
        }
        if (!too_deep.empty()) {
            std::vector<int> offending;
            for (std::size_t k = 0; k < near.size(); ++k)
                if (still_near[k]) offending.push_back(near[k]);
            throw RefinementError(
                describe_ids("adaptive upsampling hit the depth cap; check points", offending));
        }
        fine = std::move(next);
        parent = std::move(next_parent);
        length = std::move(next_length);
        std::vector<int> remaining;
        for (std::size_t k = 0; k < near.size(); ++k)
            if (still_near[k]) remaining.push_back(near[k]);
        near = std::move(remaining);
    }
    for (std::size_t i = 0; i < fine.size(); ++i) result.patches.add(std::move(fine[i]), parent[i]);
    return result;
}

PatchSet uniform_upsample(const PatchSet& coarse, int levels) {
    if (levels < 0) throw UsageError("upsampling levels must be >= 0");
    PatchSet fine(PatchRole::Fine);
    for (std::size_t i = 0; i < coarse.size(); ++i) fine.add(coarse[i], static_cast<int>(i));
    for (int l = 0; l < levels; ++l) fine = quadrisect_all(fine);
    return fine;
}

}  // namespace hedgehog
