#include "hedgehog/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hedgehog {

void PointCloud::push_back(const Vec3& p) {
    x.push_back(p.x());
    y.push_back(p.y());
    z.push_back(p.z());
}

void PointCloud::push_back(const Vec3& p, const Vec3& n) {
    push_back(p);
    nx.push_back(n.x());
    ny.push_back(n.y());
    nz.push_back(n.z());
}

void PointCloud::reserve(std::size_t n) {
    x.reserve(n);
    y.reserve(n);
    z.reserve(n);
}

PointCloud make_points(std::span<const Vec3> points) {
    PointCloud c;
    c.reserve(points.size());
    for (const Vec3& p : points) c.push_back(p);
    return c;
}

namespace {

constexpr int kBlock = 4;

// Laplace loops over a block of up to kBlock targets, so each source is loaded once
// per block. Returns the number of coincident pairs seen.
long laplace_single_block(const PointCloud& src, const double* str, const PointCloud& tgt,
                          std::size_t i0, std::size_t nb, double* out) {
    const std::size_t n = src.size();
    const double* sx = src.x.data();
    const double* sy = src.y.data();
    const double* sz = src.z.data();
    double tx[kBlock], ty[kBlock], tz[kBlock];
    for (std::size_t b = 0; b < kBlock; ++b) {
        const std::size_t i = i0 + (b < nb ? b : 0);
        tx[b] = tgt.x[i];
        ty[b] = tgt.y[i];
        tz[b] = tgt.z[i];
    }
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    long hits = 0;
#pragma omp simd reduction(+ : a0, a1, a2, a3, hits)
    for (std::size_t j = 0; j < n; ++j) {
        double acc[kBlock];
        for (int b = 0; b < kBlock; ++b) {
            const double dx = sx[j] - tx[b], dy = sy[j] - ty[b], dz = sz[j] - tz[b];
            const double r2 = dx * dx + dy * dy + dz * dz;
            const bool zero = r2 == 0.0;
            hits += (zero && b < static_cast<int>(nb)) ? 1 : 0;
            acc[b] = zero ? 0.0 : str[j] / std::sqrt(r2);
        }
        a0 += acc[0];
        a1 += acc[1];
        a2 += acc[2];
        a3 += acc[3];
    }
    const double sums[kBlock] = {a0, a1, a2, a3};
    for (std::size_t b = 0; b < nb; ++b) out[b] = detail::inv4pi * sums[b];
    return hits;
}

long laplace_double_block(const PointCloud& src, const double* str, const PointCloud& tgt,
                          std::size_t i0, std::size_t nb, double* out) {
    const std::size_t n = src.size();
    const double* sx = src.x.data();
    const double* sy = src.y.data();
    const double* sz = src.z.data();
    const double* nx = src.nx.data();
    const double* ny = src.ny.data();
    const double* nz = src.nz.data();
    double tx[kBlock], ty[kBlock], tz[kBlock];
    for (std::size_t b = 0; b < kBlock; ++b) {
        const std::size_t i = i0 + (b < nb ? b : 0);
        tx[b] = tgt.x[i];
        ty[b] = tgt.y[i];
        tz[b] = tgt.z[i];
    }
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    long hits = 0;
#pragma omp simd reduction(+ : a0, a1, a2, a3, hits)
    for (std::size_t j = 0; j < n; ++j) {
        double acc[kBlock];
        for (int b = 0; b < kBlock; ++b) {
            const double dx = sx[j] - tx[b], dy = sy[j] - ty[b], dz = sz[j] - tz[b];
            const double r2 = dx * dx + dy * dy + dz * dz;
            const bool zero = r2 == 0.0;
            hits += (zero && b < static_cast<int>(nb)) ? 1 : 0;
            const double inv = zero ? 0.0 : 1.0 / std::sqrt(r2);
            const double dn = dx * nx[j] + dy * ny[j] + dz * nz[j];
            acc[b] = str[j] * dn * inv * inv * inv;
        }
        a0 += acc[0];
        a1 += acc[1];
        a2 += acc[2];
        a3 += acc[3];
    }
    const double sums[kBlock] = {a0, a1, a2, a3};
    for (std::size_t b = 0; b < nb; ++b) out[b] = detail::inv4pi * sums[b];
    return hits;
}

// Vector kernels: one target at a time.
long vector_target(const KernelFamily& kernel, Layer layer, const PointCloud& src,
                   const double* str, const Vec3& x, double* out) {
    const std::size_t n = src.size();
    double acc[3] = {0.0, 0.0, 0.0};
    long hits = 0;
    const double nu = kernel.poisson_ratio;
    const double stokes_scale = 0.5 * detail::inv4pi / kernel.viscosity;
    const double kelvin_scale = 0.25 * detail::inv4pi / (kernel.shear_modulus * (1.0 - nu));
    const double traction_scale = 0.5 * detail::inv4pi / (1.0 - nu);
    for (std::size_t j = 0; j < n; ++j) {
        const double d[3] = {src.x[j] - x.x(), src.y[j] - x.y(), src.z[j] - x.z()};
        const double r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        if (r2 == 0.0) {
            ++hits;
            continue;
        }
        const double inv_r = 1.0 / std::sqrt(r2);
        const double* s = str + 3 * j;
        if (layer == Layer::Single) {
            if (kernel.family == Family::Stokes)
                detail::stokes_single_acc(stokes_scale, d, inv_r, s, acc);
            else
                detail::elasticity_single_acc(kelvin_scale, 3.0 - 4.0 * nu, d, inv_r, s, acc);
        } else {
            const double nrm[3] = {src.nx[j], src.ny[j], src.nz[j]};
            if (kernel.family == Family::Stokes)
                detail::stokes_double_acc(d, nrm, inv_r, s, acc);
            else
                detail::elasticity_double_acc(traction_scale, 1.0 - 2.0 * nu, d, nrm, inv_r, s, acc);
        }
    }
    for (int k = 0; k < 3; ++k) out[k] = acc[k];
    return hits;
}

}  // namespace

void DirectSummation::evaluate(const KernelFamily& kernel, Layer layer, const PointCloud& sources,
                               std::span<const double> strengths, const PointCloud& targets,
                               std::span<double> out, bool skip_coincident) const {
    const int dim = kernel.dim();
    const std::size_t m = targets.size();
    if (strengths.size() != dim * sources.size())
        throw UsageError("strength array does not match source count");
    if (out.size() != dim * m) throw UsageError("output array does not match target count");
    if (layer == Layer::Double && !sources.has_normals())
        throw UsageError("double layer needs source normals");
    long hits = 0;
    if (kernel.family == Family::Laplace) {
        const long blocks = static_cast<long>((m + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : hits)
        for (long blk = 0; blk < blocks; ++blk) {
            const std::size_t i0 = static_cast<std::size_t>(blk) * kBlock;
            const std::size_t nb = std::min<std::size_t>(kBlock, m - i0);
            hits += layer == Layer::Single
                        ? laplace_single_block(sources, strengths.data(), targets, i0, nb, &out[i0])
                        : laplace_double_block(sources, strengths.data(), targets, i0, nb, &out[i0]);
        }
    } else {
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : hits)
        for (long i = 0; i < static_cast<long>(m); ++i)
            hits += vector_target(kernel, layer, sources, strengths.data(), targets.position(i),
                                  &out[3 * i]);
    }
    if (hits > 0 && !skip_coincident)
        throw DomainError("target coincides with a quadrature node (" + std::to_string(hits) +
                          " pairs); use singular evaluation");
}

const SummationBackend& default_backend() {
    static const DirectSummation backend;
    return backend;
}

}  // namespace hedgehog
