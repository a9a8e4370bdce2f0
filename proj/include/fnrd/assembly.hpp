#pragma once

/**
 * @file assembly.hpp
 * @brief P1 mass and stiffness matrices, the mass solver, and L2 projections
 *        of scalar fields and of the Field-Noyes nonlinearity.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "fnrd/errors.hpp"
#include "fnrd/mesh.hpp"
#include "fnrd/model.hpp"
#include "fnrd/quadrature.hpp"

namespace fnrd {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Symmetric sparse matrix stored as its upper triangle (row <= col).
class SymSparseMatrix {
public:
    SymSparseMatrix() = default;

    /// Builds from triplets; (i, j) and (j, i) are merged onto the upper triangle.
    SymSparseMatrix(Eigen::Index n, const std::vector<Eigen::Triplet<double>>& triplets) : upper_(n, n)
    {
        std::vector<Eigen::Triplet<double>> canonical;
        canonical.reserve(triplets.size());
        for (const auto& t : triplets) {
            const auto r = std::min(t.row(), t.col());
            const auto c = std::max(t.row(), t.col());
            canonical.emplace_back(r, c, t.value());
        }
        upper_.setFromTriplets(canonical.begin(), canonical.end());
        upper_.makeCompressed();
    }

    [[nodiscard]] Eigen::Index rows() const noexcept { return upper_.rows(); }
    [[nodiscard]] const SparseMatrix& upper() const noexcept { return upper_; }

    [[nodiscard]] double coeff(Eigen::Index i, Eigen::Index j) const
    {
        return i <= j ? upper_.coeff(i, j) : upper_.coeff(j, i);
    }

    template <class Derived>
    [[nodiscard]] Eigen::MatrixXd operator*(const Eigen::MatrixBase<Derived>& v) const
    {
        if (v.rows() != rows()) {
            throw MeshMismatchError("matrix-vector size mismatch: " + std::to_string(rows()) + " vs " +
                                    std::to_string(v.rows()));
        }
        return upper_.selfadjointView<Eigen::Upper>() * v;
    }

    /// v^T A w
    [[nodiscard]] double bilinear(const Eigen::Ref<const Eigen::VectorXd>& v,
                                  const Eigen::Ref<const Eigen::VectorXd>& w) const
    {
        return v.dot(((*this) * w).col(0));
    }

    [[nodiscard]] SparseMatrix full() const
    {
        SparseMatrix f = upper_.selfadjointView<Eigen::Upper>();
        return f;
    }

    [[nodiscard]] Eigen::MatrixXd dense() const { return Eigen::MatrixXd(full()); }

    [[nodiscard]] SymSparseMatrix scaled_sum(double alpha, const SymSparseMatrix& other, double beta) const
    {
        SymSparseMatrix out;
        out.upper_ = alpha * upper_ + beta * other.upper_;
        out.upper_.makeCompressed();
        return out;
    }

private:
    SparseMatrix upper_;
};

/// Element mass matrix of a P1 simplex of the given measure.
inline Eigen::Matrix3d element_mass(int dim, double measure)
{
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    if (dim == 1) {
        m.topLeftCorner<2, 2>() << 2.0, 1.0, 1.0, 2.0;
        return m * (measure / 6.0);
    }
    m << 2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 2.0;
    return m * (measure / 12.0);
}

/// Element stiffness matrix from vertex coordinates (1D uses x only).
inline Eigen::Matrix3d element_stiffness(int dim, const std::array<Point, 3>& v)
{
    Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
    if (dim == 1) {
        const double len = v[1][0] - v[0][0];
        k.topLeftCorner<2, 2>() << 1.0, -1.0, -1.0, 1.0;
        return k / len;
    }
    // Gradients of barycentric coordinates are rows of the inverse Jacobian.
    Eigen::Matrix2d jac;
    jac << v[1][0] - v[0][0], v[2][0] - v[0][0], v[1][1] - v[0][1], v[2][1] - v[0][1];
    const double area = 0.5 * std::abs(jac.determinant());
    const Eigen::Matrix2d inv = jac.inverse();
    Eigen::Matrix<double, 3, 2> grads;
    grads.row(1) = inv.row(0);
    grads.row(2) = inv.row(1);
    grads.row(0) = -grads.row(1) - grads.row(2);
    k = area * grads * grads.transpose();
    return k;
}

namespace detail {

template <class ElementMatrix>
SymSparseMatrix assemble(const Mesh& mesh, ElementMatrix&& element_matrix)
{
    const int nv = mesh.vertices_per_element();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(mesh.num_elements() * nv * (nv + 1) / 2));
    for (std::ptrdiff_t e = 0; e < mesh.num_elements(); ++e) {
        const auto v = mesh.element(e);
        const Eigen::Matrix3d local = element_matrix(e);
        for (int a = 0; a < nv; ++a) {
            for (int b = 0; b < nv; ++b) {
                const auto ia = v[static_cast<std::size_t>(a)];
                const auto ib = v[static_cast<std::size_t>(b)];
                if (ia <= ib) {
                    triplets.emplace_back(ia, ib, local(a, b));
                }
            }
        }
    }
    return SymSparseMatrix(mesh.num_nodes(), triplets);
}

}  // namespace detail

inline SymSparseMatrix assemble_mass(const Mesh& mesh)
{
    return detail::assemble(mesh, [&](std::ptrdiff_t e) { return element_mass(mesh.dim(), mesh.element_measure(e)); });
}

inline SymSparseMatrix assemble_stiffness(const Mesh& mesh)
{
    return detail::assemble(mesh, [&](std::ptrdiff_t e) {
        const auto v = mesh.element(e);
        std::array<Point, 3> coords{};
        for (std::size_t k = 0; k < v.size(); ++k) {
            coords[k] = mesh.node(v[k]);
        }
        return element_stiffness(mesh.dim(), coords);
    });
}

/// Sparse Cholesky factorization of the mass matrix, computed once per mesh.
class MassSolver {
public:
    explicit MassSolver(const SymSparseMatrix& mass) : mass_(&mass)
    {
        llt_.compute(mass.upper());
        if (llt_.info() != Eigen::Success) {
            throw DecompositionError("mass matrix factorization failed (matrix not positive definite?)");
        }
    }

    [[nodiscard]] const SymSparseMatrix& matrix() const noexcept { return *mass_; }

    /// Solves M x = b for each column of b.
    [[nodiscard]] Eigen::MatrixXd solve(const Eigen::Ref<const Eigen::MatrixXd>& b) const
    {
        if (b.rows() != mass_->rows()) {
            throw MeshMismatchError("mass solve: right-hand side has " + std::to_string(b.rows()) +
                                    " rows, expected " + std::to_string(mass_->rows()));
        }
        Eigen::MatrixXd x = llt_.solve(b);
        return x;
    }

private:
    const SymSparseMatrix* mass_;
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Upper> llt_;
};

/// L2 projection of a scalar field onto the P1 space.
template <class Field>
Eigen::VectorXd l2_project(const Mesh& mesh, const MassSolver& mass, const Field& g, const QuadratureOptions& opts = {})
{
    const Eigen::VectorXd b = load_vector(mesh, g, opts);
    Eigen::VectorXd x = mass.solve(b);
    const double bnorm = b.norm();
    if (bnorm > 0.0) {
        const double residual = (mass.matrix() * x - b).norm() / bnorm;
        if (!(residual <= 1e-12)) {
            throw ProjectionError("mass solve residual " + std::to_string(residual) + " exceeds 1e-12", -1);
        }
    }
    return x;
}

/// Projection of an initial datum; nodal custom data are taken as given.
inline Eigen::VectorXd project_datum(const Mesh& mesh, const MassSolver& mass, const InitialDatum& datum)
{
    if (datum.requires_2d() && mesh.dim() != 2) {
        throw ConfigError("datum " + datum.name() + " is defined on the unit square only");
    }
    if (datum.is_nodal()) {
        if (datum.nodal_dim() != mesh.dim()) {
            throw MeshMismatchError("nodal datum dimension does not match the mesh");
        }
        if (datum.nodal_level() == mesh.level()) {
            return Eigen::Map<const Eigen::VectorXd>(datum.nodal_values().data(), mesh.num_nodes());
        }
    }
    return l2_project(mesh, mass, datum, datum.quadrature());
}

/**
 * Load vectors b_{i,s} = integral of f_s(u_h) * phi_i, one column per species.
 *
 * With u_h piecewise linear and f quadratic, the integrand has degree <= 3 on
 * every element, so the default degree-4 rule integrates it exactly.
 */
inline Eigen::MatrixXd nonlinearity_load(const Mesh& mesh, const ModelParams& params,
                                         const Eigen::Ref<const Eigen::MatrixXd>& u, int degree = 4)
{
    if (u.rows() != mesh.num_nodes() || u.cols() != kNumSpecies) {
        throw MeshMismatchError("state has shape " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) +
                                ", expected " + std::to_string(mesh.num_nodes()) + "x3");
    }
    if (!u.allFinite()) {
        throw BlowUpError("non-finite state values in nonlinearity projection");
    }
    const SimplexRule rule = simplex_rule(mesh.dim(), degree);
    const int nv = mesh.vertices_per_element();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(mesh.num_nodes(), kNumSpecies);
    for (std::ptrdiff_t e = 0; e < mesh.num_elements(); ++e) {
        const auto v = mesh.element(e);
        const double measure = mesh.element_measure(e);
        std::array<std::array<double, 3>, 3> local{};
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto& lam = rule.points[q];
            double u1 = 0.0;
            double u2 = 0.0;
            double u3 = 0.0;
            for (int a = 0; a < nv; ++a) {
                const auto ia = v[static_cast<std::size_t>(a)];
                const double la = lam[static_cast<std::size_t>(a)];
                u1 += la * u(ia, 0);
                u2 += la * u(ia, 1);
                u3 += la * u(ia, 2);
            }
            const auto f = eval_f_unchecked(params, u1, u2, u3);
            const double w = rule.weights[q] * measure;
            for (int a = 0; a < nv; ++a) {
                const double wa = w * lam[static_cast<std::size_t>(a)];
                for (std::size_t s = 0; s < 3; ++s) {
                    local[static_cast<std::size_t>(a)][s] += wa * f[s];
                }
            }
        }
        for (int a = 0; a < nv; ++a) {
            const auto ia = v[static_cast<std::size_t>(a)];
            for (std::size_t s = 0; s < 3; ++s) {
                b(ia, static_cast<Eigen::Index>(s)) += local[static_cast<std::size_t>(a)][s];
            }
        }
    }
    if (!b.allFinite()) {
        throw BlowUpError("non-finite nonlinearity load");
    }
    return b;
}

/// f_h(u) = P_h f(u_h), one column per species.
inline Eigen::MatrixXd project_nonlinearity(const Mesh& mesh, const MassSolver& mass, const ModelParams& params,
                                            const Eigen::Ref<const Eigen::MatrixXd>& u, int degree = 4)
{
    return mass.solve(nonlinearity_load(mesh, params, u, degree));
}

}  // namespace fnrd
