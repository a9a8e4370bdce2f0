#pragma once

// Independent reference computations for the unit tests. Nothing here calls
// into the library beyond its mesh/matrix types.

#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

// Golub-Welsch Gauss-Legendre on [0, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss01(int n)
{
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double beta = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = beta;
        jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = 0.5 * (es.eigenvalues()[i] + 1.0);
        const double v0 = es.eigenvectors()(0, i);
        w[static_cast<std::size_t>(i)] = v0 * v0;
    }
    return {x, w};
}

using P2 = std::array<double, 2>;

// Integral over triangle (p0, p1, p2) of g, collapsed at p0 with u = s^4 so
// that integrands behaving like |x - p0|^(-1/4) become polynomial in s.
inline double triangle_integral(const P2& p0, const P2& p1, const P2& p2, const std::function<double(const P2&)>& g,
                                int n = 20)
{
    static thread_local std::pair<std::vector<double>, std::vector<double>> rule;
    if (static_cast<int>(rule.first.size()) != n) {
        rule = gauss01(n);
    }
    const auto& [x, w] = rule;
    const double area2 = std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = x[i];
        const double u = s * s * s * s;
        const double jac = area2 * u * 4.0 * s * s * s;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double v = x[j];
            const P2 q{p0[0] + u * (p1[0] - p0[0]) + u * v * (p2[0] - p1[0]),
                       p0[1] + u * (p1[1] - p0[1]) + u * v * (p2[1] - p1[1])};
            sum += w[i] * w[j] * jac * g(q);
        }
    }
    return sum;
}

// Barycentric coordinates of q in triangle (a, b, c).
inline std::array<double, 3> barycentric(const P2& a, const P2& b, const P2& c, const P2& q)
{
    const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    const double l1 = ((q[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (q[1] - a[1])) / det;
    const double l2 = ((b[0] - a[0]) * (q[1] - a[1]) - (q[0] - a[0]) * (b[1] - a[1])) / det;
    return {1.0 - l1 - l2, l1, l2};
}

// exp(A) by scaling and squaring (Pade), from Eigen's unsupported module.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& a)
{
    return a.exp();
}

// phi_k(A) for k = 1, 2 from the exponential of an augmented block matrix.
inline Eigen::MatrixXd phim(int k, const Eigen::MatrixXd& a)
{
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero((k + 1) * n, (k + 1) * n);
    big.topLeftCorner(n, n) = a;
    for (int b = 0; b < k; ++b) {
        big.block(b * n, (b + 1) * n, n, n) = Eigen::MatrixXd::Identity(n, n);
    }
    const Eigen::MatrixXd e = expm(big);
    return e.block(0, k * n, n, n);
}

// Classical RK4 for a scalar ODE.
inline double rk4(const std::function<double(double)>& rhs, double u, double t_end, double dt)
{
    const long steps = std::lround(t_end / dt);
    for (long k = 0; k < steps; ++k) {
        const double k1 = rhs(u);
        const double k2 = rhs(u + 0.5 * dt * k1);
        const double k3 = rhs(u + 0.5 * dt * k2);
        const double k4 = rhs(u + dt * k3);
        u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return u;
}

// Least-squares slope of y against x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
