#include "hedgehog/evaluation.hpp"

#include <cmath>

namespace hedgehog {

std::vector<ZoneLabel> mark_points(const PointCloud& targets, const Discretization& disc,
                                   double eps_target, const SummationBackend& backend) {
    if (!(eps_target > 0.0)) throw UsageError("eps_target must be positive");
    std::vector<ZoneLabel> labels(targets.size());
    if (targets.size() == 0) return labels;

    // winding number: Laplace double layer of unit density on the coarse nodes. With
    // flipped normals it measures the complement, so the domain value is 1 + D[1].
    const QuadratureNodeSet& nodes = disc.coarse_nodes();
    std::vector<double> winding(targets.size(), 0.0);
    backend.evaluate(KernelFamily::laplace(), Layer::Double, nodes.points, nodes.weight, targets,
                     winding, true);
    const double offset = disc.exterior() ? 1.0 : 0.0;

    const long count = static_cast<long>(targets.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) {
        ZoneLabel& label = labels[i];
        label.winding = offset + winding[i];
        if (std::abs(label.winding - 1.0) < eps_target) {
            label.inside = true;
            label.zone = Zone::Far;
            continue;
        }
        if (std::abs(label.winding) < eps_target) {
            label.inside = false;
            label.zone = Zone::Far;
            continue;
        }
        const Vec3 x = targets.position(i);
        const SurfacePoint sp = disc.index().closest_point(x);
        const SurfacePatch& patch = disc.coarse()[sp.patch];
        const Vec3 y = patch.evaluate(sp.s, sp.t);
        // surface points count as inside (closure of the domain)
        label.inside = normal(patch, sp.s, sp.t).dot(x - y) <= 0.0;
        label.zone = sp.distance <= disc.coarse().length(sp.patch) ? Zone::Near : Zone::Intermediate;
        label.closest = sp;
    }
    return labels;
}

}  // namespace hedgehog
