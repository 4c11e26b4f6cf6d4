#include "hedgehog/evaluation.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

namespace hedgehog {

Vec3 CheckPointSet::center() const {
    const int p = static_cast<int>(points.size()) - 1;
    return anchor + side_sign(side) * (first_distance + 0.5 * spacing * (p + 1)) * normal;
}

CheckPointSet generate_check_points(const SurfacePatch& patch, double length, double s, double t,
                                    const EvalOptions& opts, Side side) {
    opts.validate();
    CheckPointSet set;
    set.anchor = patch.evaluate(s, t);
    set.normal = normal(patch, s, t);
    set.first_distance = opts.first_distance(length);
    set.spacing = opts.spacing(length);
    set.side = side;
    const double sign = side_sign(side);
    set.points.reserve(opts.p + 1);
    for (int k = 0; k <= opts.p; ++k)
        set.points.push_back(set.anchor + sign * (set.first_distance + k * set.spacing) * set.normal);
    return set;
}

std::vector<double> extrapolation_weights(int p, double t) {
    if (p < 0) throw UsageError("extrapolation order must be >= 0");
    std::vector<double> l(p + 1, 0.0);
    for (int s = 0; s <= p; ++s) {
        if (t == static_cast<double>(s)) {
            l[s] = 1.0;
            return l;
        }
    }
    // w_s = (-1)^(p-s) / (s! (p-s)!), node polynomial prod (t - k)
    double node_poly = 1.0;
    for (int k = 0; k <= p; ++k) node_poly *= t - k;
    double fact_s = 1.0;
    std::vector<double> fact(p + 1, 1.0);
    for (int k = 1; k <= p; ++k) fact[k] = fact[k - 1] * k;
    for (int s = 0; s <= p; ++s) {
        fact_s = fact[s] * fact[p - s];
        const double w = ((p - s) % 2 == 0 ? 1.0 : -1.0) / fact_s;
        l[s] = node_poly * w / (t - s);
    }
    return l;
}

double extrapolate(std::span<const double> values, double t) {
    if (values.empty()) throw UsageError("extrapolation needs at least one value");
    const auto l = extrapolation_weights(static_cast<int>(values.size()) - 1, t);
    double sum = 0.0;
    for (std::size_t s = 0; s < values.size(); ++s) sum += l[s] * values[s];
    return sum;
}

Discretization::Discretization(PatchSet coarse, PatchSet fine, const EvalOptions& opts)
    : coarse_(std::move(coarse)), fine_(std::move(fine)), opts_(opts) {
    opts_.validate();
    if (coarse_.empty()) throw UsageError("discretization of an empty patch set");
    if (!fine_.has_lineage()) throw UsageError("fine patch set has no lineage to the coarse set");
    coarse_nodes_ = discretize(coarse_, opts_.q);
    fine_nodes_ = discretize(fine_, opts_.q);
    upsampler_ = Upsampler(coarse_, fine_, opts_.q);
    index_ = std::make_unique<SurfaceIndex>(coarse_);
    exterior_ = coarse_[0].orientation < 0;
    build_tree();
}

void Discretization::build_tree() {
    using Kind = QuadratureTreeNode::Kind;
    std::vector<std::vector<std::size_t>> below(coarse_.size());
    for (std::size_t f = 0; f < fine_.size(); ++f) below[fine_.parent(f)].push_back(f);
    struct Item {
        std::size_t node;
        int root;
        SurfacePatch patch;
        std::vector<std::size_t> fine;
    };
    std::vector<Item> stack;
    tree_.resize(coarse_.size());
    for (std::size_t i = 0; i < coarse_.size(); ++i) {
        tree_[i].kind = Kind::Coarse;
        tree_[i].index = i;
        tree_[i].box = near_zone_box(coarse_[i], coarse_.length(i));
        stack.push_back({i, static_cast<int>(i), coarse_[i], std::move(below[i])});
    }
    while (!stack.empty()) {
        Item item = std::move(stack.back());
        stack.pop_back();
        if (item.fine.empty()) throw UsageError("fine set does not cover its coarse patch");
        if (item.fine.size() == 1 && fine_[item.fine[0]].depth == item.patch.depth) {
            tree_[item.node].leaf = item.fine[0];
            continue;
        }
        const auto kids = item.patch.quadrisect();
        std::array<std::vector<std::size_t>, 4> parts;
        for (std::size_t f : item.fine) {
            const Subdomain& d = fine_[f].domain;
            if (fine_[f].depth <= item.patch.depth)
                throw UsageError("fine patch is not below its coarse ancestor");
            parts[(d.cs > item.patch.domain.cs ? 1 : 0) + (d.ct > item.patch.domain.ct ? 2 : 0)]
                .push_back(f);
        }
        const std::size_t first = tree_.size();
        tree_[item.node].first_child = static_cast<int>(first);
        tree_.resize(first + 4);
        for (int k = 0; k < 4; ++k) {
            QuadratureTreeNode& node = tree_[first + k];
            if (parts[k].size() == 1 && fine_[parts[k][0]].depth == kids[k].depth) {
                const std::size_t f = parts[k][0];
                node.kind = Kind::Fine;
                node.index = node.leaf = f;
                node.box = near_zone_box(fine_[f], fine_.length(f));
                continue;
            }
            internal_.add(kids[k], item.root);
            node.kind = Kind::Internal;
            node.index = internal_.size() - 1;
            node.box = near_zone_box(kids[k], internal_.length(node.index));
            stack.push_back({first + k, item.root, kids[k], std::move(parts[k])});
        }
    }
    if (!internal_.empty()) {
        internal_nodes_ = discretize(internal_, opts_.q);
        internal_upsampler_ = Upsampler(coarse_, internal_, opts_.q);
    }
}

namespace {

// Layer potential at off-surface points, summed over the quadrature tree: each target
// sees a node through its own rule once it is outside the node's near-zone box.
// BoundaryOperator::assemble_dense visits the same nodes.
std::vector<double> tree_potential(const KernelFamily& kernel, Layer layer,
                                   const Discretization& disc, const DensityField& density,
                                   const DensityField& fine_density, const PointCloud& points,
                                   const SummationBackend& backend) {
    using Kind = QuadratureTreeNode::Kind;
    const int dim = kernel.dim();
    std::vector<double> out(points.size() * dim, 0.0);
    if (points.size() == 0) return out;
    const auto cs = weighted_strengths(disc.coarse_nodes(), density);
    const auto fs = weighted_strengths(disc.fine_nodes(), fine_density);
    std::vector<double> is;
    if (!disc.internal().empty()) {
        DensityField internal(dim, disc.internal_nodes().size());
        disc.internal_upsampler().apply(density.values, internal.values, dim);
        is = weighted_strengths(disc.internal_nodes(), internal);
    }
    const std::size_t qq = static_cast<std::size_t>(disc.options().q) * disc.options().q;

    PointCloud src, pts;
    std::vector<double> str, vals;
    auto integrate = [&](Kind kind, std::size_t patch, const std::vector<std::size_t>& ids) {
        const QuadratureNodeSet& nodes = kind == Kind::Coarse     ? disc.coarse_nodes()
                                         : kind == Kind::Internal ? disc.internal_nodes()
                                                                  : disc.fine_nodes();
        const std::vector<double>& w = kind == Kind::Coarse ? cs : kind == Kind::Internal ? is : fs;
        src = PointCloud();
        src.reserve(qq);
        str.clear();
        for (std::size_t J = patch * qq; J < (patch + 1) * qq; ++J) {
            src.push_back(nodes.position(J), nodes.normal(J));
            for (int k = 0; k < dim; ++k) str.push_back(w[J * dim + k]);
        }
        pts = PointCloud();
        pts.reserve(ids.size());
        for (std::size_t i : ids) pts.push_back(points.position(i));
        vals.assign(ids.size() * dim, 0.0);
        backend.evaluate(kernel, layer, src, str, pts, vals, false);
        for (std::size_t j = 0; j < ids.size(); ++j)
            for (int d = 0; d < dim; ++d) out[ids[j] * dim + d] += vals[j * dim + d];
    };

    const auto& tree = disc.tree();
    std::vector<std::size_t> all(points.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> stack;
    std::vector<std::size_t> far, near;
    for (std::size_t root = 0; root < disc.coarse().size(); ++root) {
        stack.emplace_back(root, all);
        while (!stack.empty()) {
            auto [id, ids] = std::move(stack.back());
            stack.pop_back();
            const QuadratureTreeNode& node = tree[id];
            if (node.first_child < 0 && node.kind == Kind::Fine) {
                integrate(Kind::Fine, node.index, ids);
                continue;
            }
            far.clear();
            near.clear();
            for (std::size_t i : ids)
                (node.box.contains(points.position(i)) ? near : far).push_back(i);
            if (!far.empty()) integrate(node.kind, node.index, far);
            if (near.empty()) continue;
            if (node.first_child < 0) {
                integrate(Kind::Fine, node.leaf, near);
                continue;
            }
            for (int k = 0; k < 4; ++k) stack.emplace_back(node.first_child + k, near);
        }
    }
    return out;
}

void check_density(const KernelFamily& kernel, const Discretization& disc,
                   const DensityField& density) {
    if (density.dim != kernel.dim()) throw UsageError("density dimension does not match kernel");
    if (density.nodes() != disc.coarse_nodes().size())
        throw UsageError("density does not live on the coarse nodes");
}

}  // namespace

std::vector<double> evaluate_on_surface(const KernelFamily& kernel, Layer layer,
                                        const Discretization& disc, const DensityField& density,
                                        std::span<const SurfacePoint> points, Side side,
                                        const SummationBackend& backend) {
    check_density(kernel, disc, density);
    const EvalOptions& opts = disc.options();
    const int dim = kernel.dim();
    const int per = opts.p + 1;
    std::vector<double> out(points.size() * dim, 0.0);
    if (points.empty()) return out;

    PointCloud checks;
    checks.reserve(points.size() * per);
    for (const SurfacePoint& sp : points) {
        if (sp.patch < 0 || static_cast<std::size_t>(sp.patch) >= disc.coarse().size())
            throw UsageError("surface point refers to an unknown patch");
        const CheckPointSet c = generate_check_points(disc.coarse()[sp.patch],
                                                      disc.coarse().length(sp.patch), sp.s, sp.t,
                                                      opts, side);
        for (const Vec3& x : c.points) checks.push_back(x);
    }
    const DensityField fine_density = upsample_density(disc.upsampler(), density);
    const auto values =
        tree_potential(kernel, layer, disc, density, fine_density, checks, backend);
    const auto w = extrapolation_weights(opts.p, opts.surface_coordinate());
    for (std::size_t i = 0; i < points.size(); ++i)
        for (int s = 0; s < per; ++s)
            for (int k = 0; k < dim; ++k) out[i * dim + k] += w[s] * values[(i * per + s) * dim + k];
    return out;
}

std::vector<double> evaluate_at_nodes(const KernelFamily& kernel, Layer layer,
                                      const Discretization& disc, const DensityField& density,
                                      std::span<const std::size_t> nodes, Side side,
                                      const SummationBackend& backend) {
    const QuadratureNodeSet& cn = disc.coarse_nodes();
    std::vector<SurfacePoint> points;
    const std::size_t count = nodes.empty() ? cn.size() : nodes.size();
    points.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t I = nodes.empty() ? k : nodes[k];
        if (I >= cn.size()) throw UsageError("node index out of range");
        points.push_back({cn.patch[I], cn.s[I], cn.t[I], 0.0, false});
    }
    return evaluate_on_surface(kernel, layer, disc, density, points, side, backend);
}

std::vector<double> evaluate_one_sided(const KernelFamily& kernel, Layer layer,
                                       const Discretization& disc, const DensityField& density,
                                       const PointCloud& targets,
                                       std::span<const ZoneLabel> labels,
                                       const SummationBackend& backend,
                                       std::vector<char>* inside_mask) {
    check_density(kernel, disc, density);
    if (labels.size() != targets.size()) throw UsageError("one label per target required");
    const EvalOptions& opts = disc.options();
    const int dim = kernel.dim();
    const int per = opts.p + 1;
    std::vector<double> out(targets.size() * dim, 0.0);
    if (inside_mask) inside_mask->assign(targets.size(), 0);

    // Far targets use the coarse rule, intermediate ones and near ones at least R from
    // the surface the fine rule; the rest extrapolate from their check points.
    std::vector<std::size_t> far, fine, near;
    std::vector<double> near_t;
    PointCloud far_pts, fine_pts, near_checks;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const ZoneLabel& label = labels[i];
        if (!label.inside) continue;
        if (inside_mask) (*inside_mask)[i] = 1;
        const Vec3 x = targets.position(i);
        if (label.zone == Zone::Far) {
            far.push_back(i);
            far_pts.push_back(x);
            continue;
        }
        if (!label.closest) throw UsageError("near-surface label without closest point");
        const SurfacePoint& sp = *label.closest;
        const double L = disc.coarse().length(sp.patch);
        const double R = opts.first_distance(L);
        if (label.zone == Zone::Intermediate || sp.distance >= R) {
            fine.push_back(i);
            fine_pts.push_back(x);
            continue;
        }
        const CheckPointSet c =
            generate_check_points(disc.coarse()[sp.patch], L, sp.s, sp.t, opts, Side::Interior);
        for (const Vec3& p : c.points) near_checks.push_back(p);
        near.push_back(i);
        near_t.push_back(((x - c.anchor).norm() - c.first_distance) / c.spacing);
    }

    auto scatter = [&](const std::vector<std::size_t>& ids, const std::vector<double>& values) {
        for (std::size_t k = 0; k < ids.size(); ++k)
            for (int d = 0; d < dim; ++d) out[ids[k] * dim + d] = values[k * dim + d];
    };
    if (!far.empty())
        scatter(far, smooth_potential(kernel, layer, disc.coarse_nodes(), density, far_pts, backend));
    if (fine.empty() && near.empty()) return out;

    const DensityField fine_density = upsample_density(disc.upsampler(), density);
    if (!fine.empty())
        scatter(fine,
                tree_potential(kernel, layer, disc, density, fine_density, fine_pts, backend));
    if (!near.empty()) {
        const auto values =
            tree_potential(kernel, layer, disc, density, fine_density, near_checks, backend);
        for (std::size_t k = 0; k < near.size(); ++k) {
            const auto w = extrapolation_weights(opts.p, near_t[k]);
            for (int d = 0; d < dim; ++d) {
                double sum = 0.0;
                for (int s = 0; s < per; ++s) sum += w[s] * values[(k * per + s) * dim + d];
                out[near[k] * dim + d] = sum;
            }
        }
    }
    return out;
}

SurfaceStencil surface_stencil(const Discretization& disc, bool two_sided) {
    const EvalOptions& opts = disc.options();
    const QuadratureNodeSet& cn = disc.coarse_nodes();
    SurfaceStencil st;
    st.sides = two_sided ? 2 : 1;
    st.per_side = opts.p + 1;
    st.points.reserve(cn.size() * st.sides * st.per_side);
    for (std::size_t I = 0; I < cn.size(); ++I) {
        const double L = disc.coarse().length(cn.patch[I]);
        const double R = opts.first_distance(L), r = opts.spacing(L);
        const Vec3 y = cn.position(I), n = cn.normal(I);
        for (int side = 0; side < st.sides; ++side) {
            const double sign = side_sign(side == 0 ? Side::Interior : Side::Exterior);
            for (int s = 0; s < st.per_side; ++s) st.points.push_back(y + sign * (R + s * r) * n);
        }
    }
    st.weights = extrapolation_weights(opts.p, opts.surface_coordinate());
    return st;
}

std::vector<double> evaluate_two_sided(const KernelFamily& kernel, const Discretization& disc,
                                       const SurfaceStencil& stencil, const DensityField& density,
                                       const SummationBackend& backend) {
    check_density(kernel, disc, density);
    const int dim = kernel.dim();
    const std::size_t n = disc.coarse_nodes().size();
    const DensityField fine_density = upsample_density(disc.upsampler(), density);
    const auto values =
        tree_potential(kernel, Layer::Double, disc, density, fine_density, stencil.points,
                       backend);
    const int per = stencil.per_side;
    std::vector<double> out(n * dim, 0.0);
    for (std::size_t I = 0; I < n; ++I) {
        for (int d = 0; d < dim; ++d) {
            double sum = 0.0;
            for (int side = 0; side < stencil.sides; ++side)
                for (int s = 0; s < per; ++s)
                    sum += stencil.weights[s] *
                           values[((I * stencil.sides + side) * per + s) * dim + d];
            out[I * dim + d] = stencil.sides == 2 ? 0.5 * density.values[I * dim + d] + 0.5 * sum
                                                  : sum;
        }
    }
    return out;
}

std::vector<double> evaluate_two_sided(const KernelFamily& kernel, const Discretization& disc,
                                       const DensityField& density,
                                       const SummationBackend& backend) {
    return evaluate_two_sided(kernel, disc, surface_stencil(disc, true), density, backend);
}

PointCloud read_targets(std::istream& in) {
    PointCloud targets;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        double x, y, z;
        if (!(fields >> x)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw ParseError("targets line " + std::to_string(number) + ": expected x y z");
        }
        std::string rest;
        if (!(fields >> y >> z) || (fields >> rest))
            throw ParseError("targets line " + std::to_string(number) + ": expected x y z");
        targets.push_back(Vec3(x, y, z));
    }
    return targets;
}

void write_evaluations(std::ostream& out, const PointCloud& targets, std::span<const ZoneLabel> labels,
                       std::span<const double> values, int dim) {
    if (labels.size() != targets.size() || values.size() != targets.size() * dim)
        throw UsageError("write_evaluations: size mismatch");
    static constexpr const char* zones[] = {"far", "intermediate", "near"};
    out << std::setprecision(17);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        out << targets.x[i] << ' ' << targets.y[i] << ' ' << targets.z[i] << ' ' << int(labels[i].inside)
            << ' ' << zones[static_cast<int>(labels[i].zone)];
        for (int a = 0; a < dim; ++a) out << ' ' << values[i * dim + a];
        out << '\n';
    }
}

}  // namespace hedgehog
