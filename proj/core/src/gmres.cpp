#include "hedgehog/solver.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace hedgehog {

GmresResult gmres(const LinearMap& apply, std::span<const double> rhs, double tolerance,
                  int max_iterations) {
    if (!(tolerance > 0.0)) throw UsageError("GMRES tolerance must be positive");
    if (max_iterations < 1) throw UsageError("GMRES needs at least one iteration");
    const Eigen::Index n = static_cast<Eigen::Index>(rhs.size());
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
    GmresResult result;
    result.x.assign(rhs.size(), 0.0);
    const double beta = b.norm();
    result.history.push_back(1.0);
    if (beta == 0.0) {
        result.converged = true;
        return result;
    }

    const int m = static_cast<int>(std::min<Eigen::Index>(max_iterations, n));
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(m), sn = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    g(0) = beta;
    V.col(0) = b / beta;

    int k = 0;
    Eigen::VectorXd w(n);
    while (k < m) {
        apply(std::span<const double>(V.col(k).data(), n), std::span<double>(w.data(), n));
        // modified Gram-Schmidt, twice for orthogonality at tight tolerances
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i <= k; ++i) {
                const double h = V.col(i).dot(w);
                H(i, k) += h;
                w -= h * V.col(i);
            }
        }
        H(k + 1, k) = w.norm();
        for (int i = 0; i < k; ++i) {
            const double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
            H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
            H(i, k) = t;
        }
        const double denom = std::hypot(H(k, k), H(k + 1, k));
        const double next = H(k + 1, k);
        cs(k) = denom == 0.0 ? 1.0 : H(k, k) / denom;
        sn(k) = denom == 0.0 ? 0.0 : next / denom;
        H(k, k) = denom;
        H(k + 1, k) = 0.0;
        g(k + 1) = -sn(k) * g(k);
        g(k) = cs(k) * g(k);
        ++k;
        const double res = std::abs(g(k)) / beta;
        result.history.push_back(res);
        if (res <= tolerance || next == 0.0) break;
        V.col(k) = w / next;
    }

    const Eigen::VectorXd y =
        H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    Eigen::Map<Eigen::VectorXd> x(result.x.data(), n);
    x = V.leftCols(k) * y;
    result.iterations = k;

    Eigen::VectorXd r(n);
    apply(result.x, std::span<double>(r.data(), n));
    result.residual = (b - r).norm() / beta;
    // the recurrence estimate drives termination; the true residual may sit slightly above it
    result.converged = result.history.back() <= tolerance;
    return result;
}

}  // namespace hedgehog
