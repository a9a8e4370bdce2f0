#pragma once

// Products of a large square dense matrix with a three-column block. Four
// columns of the square matrix are consumed per sweep (twelve independent
// accumulators); other shapes fall back to Eigen.

#include <Eigen/Core>

namespace fnrd::detail {

/// Y = P^T X
inline Eigen::MatrixXd transpose_times(const Eigen::MatrixXd& p, const Eigen::Ref<const Eigen::MatrixXd>& x)
{
    if (x.cols() != 3 || x.innerStride() != 1) {
        return p.transpose() * x;
    }
    const Eigen::Index n = p.rows();
    const Eigen::Index m = p.cols();
    const Eigen::MatrixXd xc = x;
    const double* x0 = xc.col(0).data();
    const double* x1 = xc.col(1).data();
    const double* x2 = xc.col(2).data();
    Eigen::MatrixXd y(m, 3);
    Eigen::Index j = 0;
    for (; j + 4 <= m; j += 4) {
        const double* p0 = p.col(j).data();
        const double* p1 = p.col(j + 1).data();
        const double* p2 = p.col(j + 2).data();
        const double* p3 = p.col(j + 3).data();
        double a0 = 0, a1 = 0, a2 = 0, b0 = 0, b1 = 0, b2 = 0;
        double c0 = 0, c1 = 0, c2 = 0, d0 = 0, d1 = 0, d2 = 0;
#pragma omp simd reduction(+ : a0, a1, a2, b0, b1, b2, c0, c1, c2, d0, d1, d2)
        for (Eigen::Index k = 0; k < n; ++k) {
            const double u = x0[k];
            const double v = x1[k];
            const double w = x2[k];
            a0 += p0[k] * u;
            a1 += p0[k] * v;
            a2 += p0[k] * w;
            b0 += p1[k] * u;
            b1 += p1[k] * v;
            b2 += p1[k] * w;
            c0 += p2[k] * u;
            c1 += p2[k] * v;
            c2 += p2[k] * w;
            d0 += p3[k] * u;
            d1 += p3[k] * v;
            d2 += p3[k] * w;
        }
        y(j, 0) = a0;
        y(j, 1) = a1;
        y(j, 2) = a2;
        y(j + 1, 0) = b0;
        y(j + 1, 1) = b1;
        y(j + 1, 2) = b2;
        y(j + 2, 0) = c0;
        y(j + 2, 1) = c1;
        y(j + 2, 2) = c2;
        y(j + 3, 0) = d0;
        y(j + 3, 1) = d1;
        y(j + 3, 2) = d2;
    }
    for (; j < m; ++j) {
        y.row(j) = p.col(j).transpose() * xc;
    }
    return y;
}

/// Z = P C
inline Eigen::MatrixXd times(const Eigen::MatrixXd& p, const Eigen::Ref<const Eigen::MatrixXd>& c)
{
    if (c.cols() != 3) {
        return p * c;
    }
    const Eigen::Index n = p.rows();
    const Eigen::Index m = p.cols();
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, 3);
    double* z0 = z.col(0).data();
    double* z1 = z.col(1).data();
    double* z2 = z.col(2).data();
    Eigen::Index j = 0;
    for (; j + 4 <= m; j += 4) {
        const double* p0 = p.col(j).data();
        const double* p1 = p.col(j + 1).data();
        const double* p2 = p.col(j + 2).data();
        const double* p3 = p.col(j + 3).data();
        const double c00 = c(j, 0), c01 = c(j, 1), c02 = c(j, 2);
        const double c10 = c(j + 1, 0), c11 = c(j + 1, 1), c12 = c(j + 1, 2);
        const double c20 = c(j + 2, 0), c21 = c(j + 2, 1), c22 = c(j + 2, 2);
        const double c30 = c(j + 3, 0), c31 = c(j + 3, 1), c32 = c(j + 3, 2);
#pragma omp simd
        for (Eigen::Index k = 0; k < n; ++k) {
            const double a = p0[k];
            const double b = p1[k];
            const double cc = p2[k];
            const double d = p3[k];
            z0[k] += a * c00 + b * c10 + cc * c20 + d * c30;
            z1[k] += a * c01 + b * c11 + cc * c21 + d * c31;
            z2[k] += a * c02 + b * c12 + cc * c22 + d * c32;
        }
    }
    for (; j < m; ++j) {
        z += p.col(j) * c.row(j);
    }
    return z;
}

}  // namespace fnrd::detail
