#pragma once

/**
 * @file mesh.hpp
 * @brief Structured simplicial meshes of (0,1) and (0,1)^2 at dyadic levels.
 *
 * Level k has mesh size h = 2^-k. In 2D every grid square is split along the
 * diagonal from its lower-left to its upper-right corner, at every level, so
 * the mesh at level k+1 is a nested refinement of the mesh at level k and
 * prolongation between levels is exact nodal interpolation.
 *
 * Nodes are numbered lexicographically by (x2, x1), row-major:
 * node (i, j) at (i*h, j*h) has index j*(2^k + 1) + i.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fnrd/errors.hpp"

namespace fnrd {

using Point = std::array<double, 2>;

inline constexpr int kMaxMeshLevel = 10;

class Mesh {
public:
    Mesh(int dim, int level) : dim_(dim), level_(level)
    {
        if (dim != 1 && dim != 2) {
            throw ConfigError("mesh dimension must be 1 or 2, got " + std::to_string(dim));
        }
        if (level < 1 || level > kMaxMeshLevel) {
            throw ConfigError("mesh level must be in [1, " + std::to_string(kMaxMeshLevel) +
                              "], got " + std::to_string(level));
        }
        cells_ = std::ptrdiff_t{1} << level;
        h_ = 1.0 / static_cast<double>(cells_);
        const std::ptrdiff_t m = cells_ + 1;
        if (dim == 1) {
            nodes_.reserve(static_cast<std::size_t>(m));
            for (std::ptrdiff_t i = 0; i < m; ++i) {
                nodes_.push_back({static_cast<double>(i) * h_, 0.0});
            }
            connectivity_.reserve(static_cast<std::size_t>(2 * cells_));
            for (std::ptrdiff_t i = 0; i < cells_; ++i) {
                connectivity_.push_back(i);
                connectivity_.push_back(i + 1);
            }
            return;
        }
        nodes_.reserve(static_cast<std::size_t>(m * m));
        for (std::ptrdiff_t j = 0; j < m; ++j) {
            for (std::ptrdiff_t i = 0; i < m; ++i) {
                nodes_.push_back({static_cast<double>(i) * h_, static_cast<double>(j) * h_});
            }
        }
        connectivity_.reserve(static_cast<std::size_t>(6 * cells_ * cells_));
        for (std::ptrdiff_t j = 0; j < cells_; ++j) {
            for (std::ptrdiff_t i = 0; i < cells_; ++i) {
                const std::ptrdiff_t v00 = j * m + i;
                const std::ptrdiff_t v10 = v00 + 1;
                const std::ptrdiff_t v01 = v00 + m;
                const std::ptrdiff_t v11 = v01 + 1;
                // Both triangles counterclockwise, sharing the v00-v11 diagonal.
                for (std::ptrdiff_t v : {v00, v10, v11, v00, v11, v01}) {
                    connectivity_.push_back(v);
                }
            }
        }
    }

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    /// Grid cells per axis, 2^level.
    [[nodiscard]] std::ptrdiff_t cells_per_axis() const noexcept { return cells_; }
    [[nodiscard]] int vertices_per_element() const noexcept { return dim_ + 1; }

    [[nodiscard]] std::ptrdiff_t num_nodes() const noexcept
    {
        return static_cast<std::ptrdiff_t>(nodes_.size());
    }
    [[nodiscard]] std::ptrdiff_t num_elements() const noexcept
    {
        return static_cast<std::ptrdiff_t>(connectivity_.size()) / vertices_per_element();
    }

    [[nodiscard]] const Point& node(std::ptrdiff_t i) const { return nodes_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const std::vector<Point>& nodes() const noexcept { return nodes_; }

    [[nodiscard]] std::span<const std::ptrdiff_t> element(std::ptrdiff_t e) const
    {
        const auto nv = static_cast<std::size_t>(vertices_per_element());
        return {connectivity_.data() + static_cast<std::size_t>(e) * nv, nv};
    }

    /// Length (1D) or area (2D) of element e.
    [[nodiscard]] double element_measure(std::ptrdiff_t e) const
    {
        const auto v = element(e);
        if (dim_ == 1) {
            return node(v[1])[0] - node(v[0])[0];
        }
        const Point& a = node(v[0]);
        const Point& b = node(v[1]);
        const Point& c = node(v[2]);
        return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
    }

    /// Value at x of the P1 function with nodal values v.
    [[nodiscard]] double evaluate(const Eigen::Ref<const Eigen::VectorXd>& v, const Point& x) const
    {
        const auto n = static_cast<double>(cells_);
        auto locate = [n, this](double s, std::ptrdiff_t& cell) {
            const double scaled = s * n;
            cell = std::min<std::ptrdiff_t>(std::max<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor(scaled)), 0),
                                            cells_ - 1);
            return scaled - static_cast<double>(cell);
        };
        std::ptrdiff_t i = 0;
        const double xi = locate(x[0], i);
        if (dim_ == 1) {
            return (1.0 - xi) * v[i] + xi * v[i + 1];
        }
        std::ptrdiff_t j = 0;
        const double eta = locate(x[1], j);
        const std::ptrdiff_t m = cells_ + 1;
        const double f00 = v[j * m + i];
        const double f10 = v[j * m + i + 1];
        const double f01 = v[(j + 1) * m + i];
        const double f11 = v[(j + 1) * m + i + 1];
        // Barycentric weights, so grid points reproduce nodal values exactly.
        if (xi >= eta) {
            return (1.0 - xi) * f00 + (xi - eta) * f10 + eta * f11;
        }
        return (1.0 - eta) * f00 + (eta - xi) * f01 + xi * f11;
    }

private:
    int dim_;
    int level_;
    std::ptrdiff_t cells_ = 0;
    double h_ = 0.0;
    std::vector<Point> nodes_;
    std::vector<std::ptrdiff_t> connectivity_;
};

inline Mesh build_mesh(int dim, int level) { return Mesh(dim, level); }

inline bool is_nested_refinement(const Mesh& coarse, const Mesh& fine)
{
    if (coarse.dim() != fine.dim() || fine.level() <= coarse.level()) {
        return false;
    }
    const std::ptrdiff_t ratio = fine.cells_per_axis() / coarse.cells_per_axis();
    const std::ptrdiff_t mc = coarse.cells_per_axis() + 1;
    const std::ptrdiff_t mf = fine.cells_per_axis() + 1;
    for (std::ptrdiff_t c = 0; c < coarse.num_nodes(); ++c) {
        const std::ptrdiff_t i = c % mc;
        const std::ptrdiff_t j = c / mc;
        const std::ptrdiff_t f = coarse.dim() == 1 ? i * ratio : j * ratio * mf + i * ratio;
        const Point& a = coarse.node(c);
        const Point& b = fine.node(f);
        if (std::abs(a[0] - b[0]) > 1e-14 || std::abs(a[1] - b[1]) > 1e-14) {
            return false;
        }
    }
    return true;
}

/// Nodal values on `fine` of the P1 function given by `v` on `coarse`.
/// Accepts a matrix so several species are prolonged at once (one column each).
inline Eigen::MatrixXd prolong(const Mesh& coarse, const Mesh& fine, const Eigen::Ref<const Eigen::MatrixXd>& v)
{
    if (!is_nested_refinement(coarse, fine)) {
        throw MeshMismatchError("prolong: level " + std::to_string(fine.level()) +
                                " mesh is not a nested refinement of level " + std::to_string(coarse.level()));
    }
    if (v.rows() != coarse.num_nodes()) {
        throw MeshMismatchError("prolong: vector length " + std::to_string(v.rows()) + " != coarse node count " +
                                std::to_string(coarse.num_nodes()));
    }
    Eigen::MatrixXd out(fine.num_nodes(), v.cols());
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        const Eigen::VectorXd column = v.col(c);
        for (std::ptrdiff_t i = 0; i < fine.num_nodes(); ++i) {
            out(i, c) = coarse.evaluate(column, fine.node(i));
        }
    }
    return out;
}

/// Plain-text node/element listing for debugging; not a stable format.
inline void write_mesh(std::ostream& os, const Mesh& mesh)
{
    os << "# dim " << mesh.dim() << " level " << mesh.level() << " h " << mesh.h() << '\n';
    os << "nodes " << mesh.num_nodes() << '\n';
    for (const Point& p : mesh.nodes()) {
        os << p[0];
        if (mesh.dim() == 2) {
            os << ' ' << p[1];
        }
        os << '\n';
    }
    os << "elements " << mesh.num_elements() << '\n';
    for (std::ptrdiff_t e = 0; e < mesh.num_elements(); ++e) {
        const auto v = mesh.element(e);
        for (std::size_t k = 0; k < v.size(); ++k) {
            os << (k ? " " : "") << v[k];
        }
        os << '\n';
    }
}

}  // namespace fnrd
