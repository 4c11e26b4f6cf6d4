#include "hedgehog/geometry.hpp"

#include <vector>

namespace hedgehog {

namespace {

// Classical Bernstein values of degree k at u, via the triangular recurrence.
void basis_u(int k, double u, double* b) {
    b[0] = 1.0;
    const double v = 1.0 - u;
    for (int j = 1; j <= k; ++j) {
        double saved = 0.0;
        for (int i = 0; i < j; ++i) {
            const double tmp = b[i];
            b[i] = saved + v * tmp;
            saved = u * tmp;
        }
        b[j] = saved;
    }
}

}  // namespace

void bernstein_basis(int n, double s, double* values) { basis_u(n, 0.5 * (s + 1.0), values); }

void bernstein_basis_derivs(int n, double s, double* values, double* d1, double* d2) {
    const double u = 0.5 * (s + 1.0);
    double low[64];
    if (values) basis_u(n, u, values);
    // d/ds = (1/2) d/du; dB_l^n/du = n (B_{l-1}^{n-1} - B_l^{n-1})
    if (d1) {
        if (n == 0) {
            d1[0] = 0.0;
        } else {
            basis_u(n - 1, u, low);
            for (int l = 0; l <= n; ++l) {
                const double left = (l > 0) ? low[l - 1] : 0.0;
                const double right = (l < n) ? low[l] : 0.0;
                d1[l] = 0.5 * n * (left - right);
            }
        }
    }
    if (d2) {
        if (n < 2) {
            for (int l = 0; l <= n; ++l) d2[l] = 0.0;
        } else {
            basis_u(n - 2, u, low);
            for (int l = 0; l <= n; ++l) {
                const double a = (l >= 2) ? low[l - 2] : 0.0;
                const double b = (l >= 1 && l - 1 <= n - 2) ? low[l - 1] : 0.0;
                const double c = (l <= n - 2) ? low[l] : 0.0;
                d2[l] = 0.25 * n * (n - 1) * (a - 2.0 * b + c);
            }
        }
    }
}

}  // namespace hedgehog
