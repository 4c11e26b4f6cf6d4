#include "hedgehog/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <vector>

namespace hedgehog {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

Upsampler::Upsampler(const PatchSet& coarse, const PatchSet& fine, int q) : q_(q) {
    if (!fine.has_lineage()) throw UsageError("fine patch set has no lineage to the coarse set");
    const auto nodes = cc_rule(q).nodes;
    std::map<std::array<double, 3>, int> seen;
    fine_parent_.resize(fine.size());
    placement_.resize(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const int parent = fine.parent(i);
        if (parent < 0 || static_cast<std::size_t>(parent) >= coarse.size())
            throw UsageError("fine patch lineage points outside the coarse set");
        const SurfacePatch& f = fine[i];
        const SurfacePatch& c = coarse[parent];
        if (f.root != c.root) throw UsageError("fine patch and its ancestor have different roots");
        const std::array<double, 3> key = {(f.domain.cs - c.domain.cs) / c.domain.half,
                                           (f.domain.ct - c.domain.ct) / c.domain.half,
                                           f.domain.half / c.domain.half};
        fine_parent_[i] = parent;
        auto [it, inserted] = seen.emplace(key, static_cast<int>(placements_.size()));
        if (inserted) {
            std::vector<double> ps(q), pt(q);
            for (int a = 0; a < q; ++a) {
                ps[a] = key[0] + key[2] * nodes[a];
                pt[a] = key[1] + key[2] * nodes[a];
            }
            placements_.push_back({chebyshev_interpolation_matrix(q, ps),
                                   chebyshev_interpolation_matrix(q, pt)});
        }
        placement_[i] = it->second;
    }
}

void Upsampler::apply(std::span<const double> coarse, std::span<double> fine, int dim) const {
    const std::size_t per = static_cast<std::size_t>(q_) * q_;
    if (fine.size() != per * dim * fine_parent_.size())
        throw UsageError("fine buffer has the wrong size for upsampling");
    const long count = static_cast<long>(fine_parent_.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < count; ++i) {
        const Placement& pl = placements_[placement_[i]];
        Eigen::Map<const RowMatrix> S(pl.along_s.data(), q_, q_);
        Eigen::Map<const RowMatrix> T(pl.along_t.data(), q_, q_);
        const double* src = coarse.data() + static_cast<std::size_t>(fine_parent_[i]) * per * dim;
        double* dst = fine.data() + static_cast<std::size_t>(i) * per * dim;
        for (int k = 0; k < dim; ++k) {
            Eigen::Map<const RowMatrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>> C(
                src + k, q_, q_, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(q_ * dim, dim));
            Eigen::Map<RowMatrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>> F(
                dst + k, q_, q_, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(q_ * dim, dim));
            F.noalias() = S * C * T.transpose();
        }
    }
}

void Upsampler::apply_transpose_patch(std::size_t fine_patch, const double* fine_block,
                                      double* coarse_block, int dim) const {
    // C += S^T F T per component; hand-rolled since this runs once per fine patch per
    // operator row and Eigen's strided maps allocate temporaries
    const Placement& pl = placements_[placement_[fine_patch]];
    const int q = q_;
    const double* S = pl.along_s.data();
    const double* T = pl.along_t.data();
    thread_local std::vector<double> tmp;
    tmp.assign(static_cast<std::size_t>(q) * q, 0.0);
    for (int k = 0; k < dim; ++k) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (int i = 0; i < q; ++i)
            for (int a = 0; a < q; ++a) {
                const double sia = S[i * q + a];
                double* t = tmp.data() + a * q;
                const double* f = fine_block + static_cast<std::size_t>(i) * q * dim + k;
                for (int j = 0; j < q; ++j) t[j] += sia * f[j * dim];
            }
        for (int a = 0; a < q; ++a) {
            double* c = coarse_block + static_cast<std::size_t>(a) * q * dim + k;
            const double* t = tmp.data() + a * q;
            for (int j = 0; j < q; ++j) {
                const double taj = t[j];
                const double* trow = T + j * q;
                for (int b = 0; b < q; ++b) c[b * dim] += taj * trow[b];
            }
        }
    }
}

void Upsampler::apply_transpose(std::span<const double> fine, std::span<double> coarse,
                                int dim) const {
    const std::size_t per = static_cast<std::size_t>(q_) * q_;
    if (fine.size() != per * dim * fine_parent_.size())
        throw UsageError("fine buffer has the wrong size for upsampling");
    // serial: several fine patches share one coarse block
    for (std::size_t i = 0; i < fine_parent_.size(); ++i)
        apply_transpose_patch(i, fine.data() + i * per * dim,
                              coarse.data() + static_cast<std::size_t>(fine_parent_[i]) * per * dim,
                              dim);
}

DensityField upsample_density(const Upsampler& upsampler, const DensityField& coarse) {
    const std::size_t per = static_cast<std::size_t>(upsampler.q()) * upsampler.q();
    DensityField fine(coarse.dim, per * upsampler.fine_patches());
    upsampler.apply(coarse.values, fine.values, coarse.dim);
    return fine;
}

}  // namespace hedgehog
