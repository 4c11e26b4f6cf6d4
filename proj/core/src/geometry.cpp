#include "hedgehog/geometry.hpp"

#include "hedgehog/clenshaw_curtis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace hedgehog {

namespace {

constexpr int kMaxDegree = 40;

}  // namespace

Subdomain Subdomain::child(int k) const {
    const double h = 0.5 * half;
    return {cs + ((k & 1) ? h : -h), ct + ((k & 2) ? h : -h), h};
}

std::array<double, 2> Subdomain::relative_to(const Subdomain& ancestor, double s, double t) const {
    const auto [u, v] = map(s, t);
    return {(u - ancestor.cs) / ancestor.half, (v - ancestor.ct) / ancestor.half};
}

BezierPatch::BezierPatch(int degree, std::vector<Vec3> control_points)
    : degree_(degree), ctrl_(std::move(control_points)) {
    if (degree < 1 || degree > kMaxDegree) throw UsageError("patch degree must be in [1, 40]");
    if (ctrl_.size() != static_cast<std::size_t>((degree + 1) * (degree + 1)))
        throw UsageError("patch needs (n+1)^2 control points");
}

Vec3 BezierPatch::evaluate(double s, double t) const {
    const int n1 = degree_ + 1;
    double bs[kMaxDegree + 1], bt[kMaxDegree + 1];
    bernstein_basis(degree_, s, bs);
    bernstein_basis(degree_, t, bt);
    Vec3 p = Vec3::Zero();
    for (int l = 0; l < n1; ++l) {
        Vec3 row = Vec3::Zero();
        for (int m = 0; m < n1; ++m) row += bt[m] * ctrl_[l * n1 + m];
        p += bs[l] * row;
    }
    return p;
}

PatchFrame BezierPatch::frame(double s, double t) const {
    const int n1 = degree_ + 1;
    double bs[kMaxDegree + 1], ds[kMaxDegree + 1], bt[kMaxDegree + 1], dt[kMaxDegree + 1];
    bernstein_basis_derivs(degree_, s, bs, ds, nullptr);
    bernstein_basis_derivs(degree_, t, bt, dt, nullptr);
    PatchFrame f{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    for (int l = 0; l < n1; ++l) {
        Vec3 row = Vec3::Zero();
        Vec3 row_t = Vec3::Zero();
        for (int m = 0; m < n1; ++m) {
            row += bt[m] * ctrl_[l * n1 + m];
            row_t += dt[m] * ctrl_[l * n1 + m];
        }
        f.position += bs[l] * row;
        f.ds += ds[l] * row;
        f.dt += bs[l] * row_t;
    }
    return f;
}

PatchHessian BezierPatch::hessian(double s, double t) const {
    const int n1 = degree_ + 1;
    double bs[kMaxDegree + 1], ds[kMaxDegree + 1], dss[kMaxDegree + 1];
    double bt[kMaxDegree + 1], dt[kMaxDegree + 1], dtt[kMaxDegree + 1];
    bernstein_basis_derivs(degree_, s, bs, ds, dss);
    bernstein_basis_derivs(degree_, t, bt, dt, dtt);
    PatchHessian h;
    h.position = h.ds = h.dt = h.dss = h.dst = h.dtt = Vec3::Zero();
    for (int l = 0; l < n1; ++l) {
        Vec3 r0 = Vec3::Zero(), r1 = Vec3::Zero(), r2 = Vec3::Zero();
        for (int m = 0; m < n1; ++m) {
            const Vec3& a = ctrl_[l * n1 + m];
            r0 += bt[m] * a;
            r1 += dt[m] * a;
            r2 += dtt[m] * a;
        }
        h.position += bs[l] * r0;
        h.ds += ds[l] * r0;
        h.dss += dss[l] * r0;
        h.dt += bs[l] * r1;
        h.dst += ds[l] * r1;
        h.dtt += bs[l] * r2;
    }
    return h;
}

namespace {

// Splits a control polygon at its midpoint; `left` and `right` get n+1 points each.
void split_half(const Vec3* pts, int stride, int n, Vec3* left, Vec3* right, int out_stride) {
    Vec3 work[kMaxDegree + 1];
    for (int i = 0; i <= n; ++i) work[i] = pts[i * stride];
    left[0] = work[0];
    right[n * out_stride] = work[n];
    for (int level = 1; level <= n; ++level) {
        for (int i = 0; i <= n - level; ++i) work[i] = 0.5 * (work[i] + work[i + 1]);
        left[level * out_stride] = work[0];
        right[(n - level) * out_stride] = work[n - level];
    }
}

}  // namespace

std::array<BezierPatch, 4> BezierPatch::quadrisect() const {
    const int n = degree_;
    const int n1 = n + 1;
    // split along s (index l) first: columns m fixed
    std::vector<Vec3> lo_s(n1 * n1), hi_s(n1 * n1);
    for (int m = 0; m < n1; ++m)
        split_half(ctrl_.data() + m, n1, n, lo_s.data() + m, hi_s.data() + m, n1);
    std::array<BezierPatch, 4> out;
    const std::vector<Vec3>* halves[2] = {&lo_s, &hi_s};
    for (int hs = 0; hs < 2; ++hs) {
        std::vector<Vec3> lo_t(n1 * n1), hi_t(n1 * n1);
        const auto& src = *halves[hs];
        for (int l = 0; l < n1; ++l)
            split_half(src.data() + l * n1, 1, n, lo_t.data() + l * n1, hi_t.data() + l * n1, 1);
        out[hs] = BezierPatch(n, std::move(lo_t));
        out[hs + 2] = BezierPatch(n, std::move(hi_t));
    }
    return out;
}

void BezierPatch::sample_grid(std::span<const double> s, std::span<const double> t,
                              std::vector<Vec3>& pos, std::vector<Vec3>* ds,
                              std::vector<Vec3>* dt) const {
    const int n1 = degree_ + 1;
    const std::size_t ns = s.size(), nt = t.size();
    // basis tables
    std::vector<double> bs(ns * n1), dbs(ns * n1), bt(nt * n1), dbt(nt * n1);
    for (std::size_t i = 0; i < ns; ++i)
        bernstein_basis_derivs(degree_, s[i], &bs[i * n1], &dbs[i * n1], nullptr);
    for (std::size_t j = 0; j < nt; ++j)
        bernstein_basis_derivs(degree_, t[j], &bt[j * n1], &dbt[j * n1], nullptr);
    // contract over m first: rows[l][j] = sum_m a_lm Bt_m(t_j)
    std::vector<Vec3> rows(n1 * nt), rows_t;
    if (dt) rows_t.resize(n1 * nt);
    for (int l = 0; l < n1; ++l) {
        for (std::size_t j = 0; j < nt; ++j) {
            Vec3 acc = Vec3::Zero(), acc_t = Vec3::Zero();
            for (int m = 0; m < n1; ++m) {
                acc += bt[j * n1 + m] * ctrl_[l * n1 + m];
                if (dt) acc_t += dbt[j * n1 + m] * ctrl_[l * n1 + m];
            }
            rows[l * nt + j] = acc;
            if (dt) rows_t[l * nt + j] = acc_t;
        }
    }
    pos.assign(ns * nt, Vec3::Zero());
    if (ds) ds->assign(ns * nt, Vec3::Zero());
    if (dt) dt->assign(ns * nt, Vec3::Zero());
    for (std::size_t i = 0; i < ns; ++i) {
        for (int l = 0; l < n1; ++l) {
            const double b = bs[i * n1 + l];
            const double db = dbs[i * n1 + l];
            for (std::size_t j = 0; j < nt; ++j) {
                pos[i * nt + j] += b * rows[l * nt + j];
                if (ds) (*ds)[i * nt + j] += db * rows[l * nt + j];
                if (dt) (*dt)[i * nt + j] += b * rows_t[l * nt + j];
            }
        }
    }
}

std::array<SurfacePatch, 4> SurfacePatch::quadrisect() const {
    auto shapes = shape.quadrisect();
    std::array<SurfacePatch, 4> out;
    for (int k = 0; k < 4; ++k) {
        out[k].shape = std::move(shapes[k]);
        out[k].root = root;
        out[k].domain = domain.child(k);
        out[k].depth = depth + 1;
        out[k].orientation = orientation;
    }
    return out;
}

PatchFrame derivatives(const SurfacePatch& patch, double s, double t) {
    return patch.shape.frame(s, t);
}

Vec3 normal(const SurfacePatch& patch, double s, double t) {
    const PatchFrame f = patch.shape.frame(s, t);
    const Vec3 c = f.ds.cross(f.dt);
    const double len = c.norm();
    if (!(len > 0.0)) throw SingularParametrization("vanishing Jacobian in patch normal");
    return (patch.orientation / len) * c;
}

double metric_det(const SurfacePatch& patch, double s, double t) {
    const PatchFrame f = patch.shape.frame(s, t);
    return f.ds.cross(f.dt).squaredNorm();
}

double characteristic_length(const SurfacePatch& patch, int q) {
    const auto rule = cc_rule(q);
    std::vector<Vec3> pos, ds, dt;
    patch.shape.sample_grid(rule.nodes, rule.nodes, pos, &ds, &dt);
    double area = 0.0;
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j)
            area += rule.weights[i] * rule.weights[j] * ds[i * q + j].cross(dt[i * q + j]).norm();
    return std::sqrt(area);
}

std::pair<Vec3, Vec3> Embedding::partials(double u, double v) const {
    if (jacobian) return jacobian(u, v);
    const double h = 1e-6;
    // one-sided near the edges of [-1,1]^2 is unnecessary: maps are smooth past the edge
    const Vec3 du = (map(u + h, v) - map(u - h, v)) / (2.0 * h);
    const Vec3 dv = (map(u, v + h) - map(u, v - h)) / (2.0 * h);
    return {du, dv};
}

Embedding bezier_embedding(BezierPatch patch) {
    Embedding e;
    auto shared = std::make_shared<BezierPatch>(std::move(patch));
    e.map = [shared](double u, double v) { return shared->evaluate(u, v); };
    e.jacobian = [shared](double u, double v) {
        const PatchFrame f = shared->frame(u, v);
        return std::make_pair(f.ds, f.dt);
    };
    return e;
}

void QuadMesh::build_links(double tol) {
    links.clear();
    const std::size_t nq = quads.size();
    std::vector<std::array<Vec3, 4>> corners(nq);
    for (std::size_t i = 0; i < nq; ++i) {
        corners[i] = {quads[i].map(-1, -1), quads[i].map(1, -1), quads[i].map(-1, 1),
                      quads[i].map(1, 1)};
    }
    for (std::size_t a = 0; a < nq; ++a) {
        for (std::size_t b = a + 1; b < nq; ++b) {
            int shared = 0;
            for (const Vec3& ca : corners[a])
                for (const Vec3& cb : corners[b])
                    if ((ca - cb).norm() <= tol) ++shared;
            if (shared >= 3)
                throw UsageError("non-conforming quad mesh: quads " + std::to_string(a) + " and " +
                                 std::to_string(b) + " share " + std::to_string(shared) +
                                 " corners");
            if (shared > 0)
                links.push_back({static_cast<int>(a), static_cast<int>(b), shared});
        }
    }
}

QuadMesh QuadMesh::flipped() const {
    QuadMesh m = *this;
    m.orientation = -orientation;
    return m;
}

namespace {

std::vector<double> chebyshev_first_kind(int m) {
    std::vector<double> x(m);
    for (int i = 0; i < m; ++i) x[i] = -std::cos(std::numbers::pi * (i + 0.5) / m);
    return x;
}

std::vector<double> equispaced(int m) {
    std::vector<double> x(m);
    for (int i = 0; i < m; ++i) x[i] = -1.0 + 2.0 * i / (m - 1);
    return x;
}

}  // namespace

double fit_error(const Embedding& gamma, const SurfacePatch& patch) {
    const int n = patch.shape.degree();
    const auto grid = equispaced(8 * n);
    const std::size_t m = grid.size();
    std::vector<Vec3> pos, ds, dt;
    patch.shape.sample_grid(grid, grid, pos, &ds, &dt);
    const double h = patch.domain.half;
    double err = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const auto [u, v] = patch.domain.map(grid[i], grid[j]);
            const Vec3 g = gamma.map(u, v);
            const auto [gu, gv] = gamma.partials(u, v);
            const std::size_t k = i * m + j;
            err = std::max(err, (pos[k] - g).norm());
            err = std::max(err, (ds[k] - h * gu).norm());
            err = std::max(err, (dt[k] - h * gv).norm());
        }
    }
    return err;
}

FitResult fit_patch(const Embedding& gamma, const Subdomain& domain, int n, int root, int depth,
                    int orientation) {
    if (n < 1 || n > kMaxDegree) throw UsageError("fit degree must be in [1, 40]");
    const int n1 = n + 1;
    const auto samples = chebyshev_first_kind(4 * n);
    const int m = static_cast<int>(samples.size());
    Eigen::MatrixXd basis(m, n1);
    for (int i = 0; i < m; ++i) {
        double row[kMaxDegree + 1];
        bernstein_basis(n, samples[i], row);
        for (int l = 0; l < n1; ++l) basis(i, l) = row[l];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
    if (qr.rank() < n1) throw FittingError("rank-deficient Bernstein collocation matrix");

    // Tensor least squares: A = B^+ Y B^+^T, separately per coordinate.
    std::vector<Vec3> ctrl(n1 * n1);
    for (int c = 0; c < 3; ++c) {
        Eigen::MatrixXd values(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const auto [u, v] = domain.map(samples[i], samples[j]);
                values(i, j) = gamma.map(u, v)[c];
            }
        if (!values.allFinite()) throw FittingError("embedding returned non-finite samples");
        const Eigen::MatrixXd left = qr.solve(values);                   // n1 x m
        const Eigen::MatrixXd coef = qr.solve(left.transpose()).transpose();  // n1 x n1
        for (int l = 0; l < n1; ++l)
            for (int k = 0; k < n1; ++k) ctrl[l * n1 + k][c] = coef(l, k);
    }
    FitResult result;
    result.patch.shape = BezierPatch(n, std::move(ctrl));
    result.patch.root = root;
    result.patch.domain = domain;
    result.patch.depth = depth;
    result.patch.orientation = orientation;
    result.error = fit_error(gamma, result.patch);
    return result;
}

void PatchSet::add(SurfacePatch patch, int parent) {
    const double L = characteristic_length(patch);
    if (!(L > 0.0)) throw SingularParametrization("patch with zero area");
    patches_.push_back(std::move(patch));
    lengths_.push_back(L);
    parents_.push_back(parent);
}

bool PatchSet::has_lineage() const {
    return !parents_.empty() &&
           std::all_of(parents_.begin(), parents_.end(), [](int p) { return p >= 0; });
}

double PatchSet::max_length() const {
    return lengths_.empty() ? 0.0 : *std::max_element(lengths_.begin(), lengths_.end());
}

double PatchSet::min_length() const {
    return lengths_.empty() ? 0.0 : *std::min_element(lengths_.begin(), lengths_.end());
}

int PatchSet::max_depth() const {
    int d = 0;
    for (const auto& p : patches_) d = std::max(d, p.depth);
    return d;
}

PatchSet quadrisect_all(const PatchSet& set) {
    PatchSet out(set.role());
    for (std::size_t i = 0; i < set.size(); ++i)
        for (auto& child : set[i].quadrisect()) out.add(std::move(child), set.parent(i));
    return out;
}

PatchSet patches_from_bezier(const std::vector<BezierPatch>& patches, int orientation) {
    PatchSet set;
    for (std::size_t r = 0; r < patches.size(); ++r) {
        SurfacePatch p;
        p.shape = patches[r];
        p.root = static_cast<int>(r);
        p.orientation = orientation;
        set.add(std::move(p));
    }
    return set;
}

}  // namespace hedgehog
