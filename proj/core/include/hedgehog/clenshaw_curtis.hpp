#pragma once

#include <vector>

namespace hedgehog {

/// Closed Clenshaw-Curtis rule on [-1, 1]; nodes ascending, endpoints included.
struct ClenshawCurtisRule {
    int q = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

ClenshawCurtisRule cc_rule(int q);

/// Barycentric weights for interpolation at the Chebyshev extrema of cc_rule(q).
std::vector<double> chebyshev_barycentric_weights(int q);

/// Row-major m x q matrix mapping values at the cc_rule(q) nodes to values at `points`.
std::vector<double> chebyshev_interpolation_matrix(int q, const std::vector<double>& points);

}  // namespace hedgehog
