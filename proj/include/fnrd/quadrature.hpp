#pragma once

/**
 * @file quadrature.hpp
 * @brief Simplex quadrature rules and load-vector integration with local
 *        recursive refinement near singular points of the integrand.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "fnrd/errors.hpp"
#include "fnrd/mesh.hpp"

namespace fnrd {

/// Quadrature rule on a reference simplex. Points are barycentric coordinates
/// (third entry unused on segments); weights sum to one and are scaled by the
/// element measure at use.
struct SimplexRule {
    int degree = 0;
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
};

/// Gauss-Legendre nodes and weights on [0, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n)
{
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    const double pi = 3.14159265358979323846;
    // Legendre P_n(z) and its derivative by the three-term recurrence.
    auto legendre = [n](double z) {
        double p1 = 1.0;
        double p2 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * k - 1.0) * z * p2 - (k - 1.0) * p3) / k;
        }
        return std::pair{p1, n * (z * p1 - p2) / (z * z - 1.0)};
    };
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(z);
            const double dz = p / dp;
            z -= dz;
            if (std::abs(dz) <= 1e-16) {
                break;
            }
        }
        const double dp = legendre(z).second;
        const double weight = 1.0 / ((1.0 - z * z) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        x[lo] = 0.5 * (1.0 - z);
        x[hi] = 0.5 * (1.0 + z);
        w[lo] = weight;
        w[hi] = weight;
    }
    return {x, w};
}

/// Gauss rule on a segment, exact for polynomials of the given degree.
inline SimplexRule segment_rule(int degree)
{
    const int n = std::max(1, (degree + 2) / 2);
    auto [x, w] = gauss_legendre(n);
    SimplexRule rule{2 * n - 1, {}, {}};
    for (std::size_t i = 0; i < x.size(); ++i) {
        rule.points.push_back({1.0 - x[i], x[i], 0.0});
        rule.weights.push_back(w[i]);
    }
    return rule;
}

/// Symmetric 6-point triangle rule exact for degree 4.
inline SimplexRule triangle_rule_6pt()
{
    constexpr double a1 = 0.445948490915964886318329253883;
    constexpr double b1 = 0.108103018168070227363341492234;
    constexpr double w1 = 0.223381589678011465695007008433;
    constexpr double a2 = 0.091576213509770743459571463402;
    constexpr double b2 = 0.816847572980458513080857073196;
    constexpr double w2 = 0.109951743655321867638326324900;
    return SimplexRule{4,
                       {{b1, a1, a1}, {a1, b1, a1}, {a1, a1, b1}, {b2, a2, a2}, {a2, b2, a2}, {a2, a2, b2}},
                       {w1, w1, w1, w2, w2, w2}};
}

/// Collapsed (Duffy) tensor Gauss rule on the triangle, exact for `degree`.
inline SimplexRule triangle_rule_collapsed(int degree)
{
    const int n = std::max(1, (degree + 3) / 2);
    auto [x, w] = gauss_legendre(n);
    SimplexRule rule{2 * n - 2, {}, {}};
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double u = x[i];
            const double v = x[j];
            rule.points.push_back({1.0 - u, u * (1.0 - v), u * v});
            // Jacobian u of the collapse, times 2 for the unit-area normalisation.
            rule.weights.push_back(2.0 * w[i] * w[j] * u);
        }
    }
    return rule;
}

/// Rule for the given simplex dimension and polynomial degree. Degree <= 4 on
/// triangles selects the 6-point rule.
inline SimplexRule simplex_rule(int dim, int degree)
{
    if (dim == 1) {
        return segment_rule(degree);
    }
    return degree <= 4 ? triangle_rule_6pt() : triangle_rule_collapsed(degree);
}

/// Distance from a point to the set where an integrand is singular.
using SingularLocus = std::function<double(const Point&)>;

struct QuadratureOptions {
    int degree = 4;
    /// When set, elements close to the locus are recursively split into 2^dim
    /// children (midpoint refinement) before the rule is applied.
    std::optional<SingularLocus> locus;
    int max_depth = 12;
    /// A (sub)element is refined when its centroid lies within
    /// (radius + near_ratio * diameter) of the locus.
    double near_ratio = 1.0;
};

namespace detail {

struct SubSimplex {
    // Rows are vertices of the sub-simplex in barycentric coordinates of the parent.
    std::array<std::array<double, 3>, 3> bary;
};

template <class Field>
void integrate_subsimplex(const Field& g, const std::array<Point, 3>& verts, int dim, double parent_measure,
                          const SubSimplex& sub, double measure_fraction, const SimplexRule& rule,
                          const QuadratureOptions& opts, int depth, std::array<double, 3>& acc)
{
    const int nv = dim + 1;
    auto to_physical = [&](const std::array<double, 3>& b) {
        Point p{0.0, 0.0};
        for (int a = 0; a < nv; ++a) {
            p[0] += b[static_cast<std::size_t>(a)] * verts[static_cast<std::size_t>(a)][0];
            p[1] += b[static_cast<std::size_t>(a)] * verts[static_cast<std::size_t>(a)][1];
        }
        return p;
    };

    if (opts.locus && depth < opts.max_depth) {
        std::array<Point, 3> corners{};
        Point centroid{0.0, 0.0};
        for (int k = 0; k < nv; ++k) {
            corners[static_cast<std::size_t>(k)] = to_physical(sub.bary[static_cast<std::size_t>(k)]);
            centroid[0] += corners[static_cast<std::size_t>(k)][0] / nv;
            centroid[1] += corners[static_cast<std::size_t>(k)][1] / nv;
        }
        double radius = 0.0;
        double diameter = 0.0;
        for (int k = 0; k < nv; ++k) {
            const auto& ck = corners[static_cast<std::size_t>(k)];
            radius = std::max(radius, std::hypot(ck[0] - centroid[0], ck[1] - centroid[1]));
            for (int l = k + 1; l < nv; ++l) {
                const auto& cl = corners[static_cast<std::size_t>(l)];
                diameter = std::max(diameter, std::hypot(ck[0] - cl[0], ck[1] - cl[1]));
            }
        }
        if ((*opts.locus)(centroid) < radius + opts.near_ratio * diameter) {
            auto mid = [&](int a, int b) {
                std::array<double, 3> m{};
                for (std::size_t c = 0; c < 3; ++c) {
                    m[c] = 0.5 * (sub.bary[static_cast<std::size_t>(a)][c] + sub.bary[static_cast<std::size_t>(b)][c]);
                }
                return m;
            };
            const auto& v = sub.bary;
            if (dim == 1) {
                const auto m01 = mid(0, 1);
                for (const SubSimplex& child : {SubSimplex{{v[0], m01, {}}}, SubSimplex{{m01, v[1], {}}}}) {
                    integrate_subsimplex(g, verts, dim, parent_measure, child, 0.5 * measure_fraction, rule, opts,
                                         depth + 1, acc);
                }
                return;
            }
            const auto m01 = mid(0, 1);
            const auto m12 = mid(1, 2);
            const auto m02 = mid(0, 2);
            for (const SubSimplex& child : {SubSimplex{{v[0], m01, m02}}, SubSimplex{{m01, v[1], m12}},
                                            SubSimplex{{m02, m12, v[2]}}, SubSimplex{{m12, m02, m01}}}) {
                integrate_subsimplex(g, verts, dim, parent_measure, child, 0.25 * measure_fraction, rule, opts,
                                     depth + 1, acc);
            }
            return;
        }
    }

    const double scale = parent_measure * measure_fraction;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        std::array<double, 3> b{0.0, 0.0, 0.0};
        for (int k = 0; k < nv; ++k) {
            const double lk = rule.points[q][static_cast<std::size_t>(k)];
            for (std::size_t c = 0; c < 3; ++c) {
                b[c] += lk * sub.bary[static_cast<std::size_t>(k)][c];
            }
        }
        const double value = g(to_physical(b));
        const double wq = rule.weights[q] * scale * value;
        for (int a = 0; a < nv; ++a) {
            acc[static_cast<std::size_t>(a)] += wq * b[static_cast<std::size_t>(a)];
        }
    }
}

}  // namespace detail

/// Returns the element load contributions (integral of g * phi_a) for each
/// vertex a of element e.
template <class Field>
std::array<double, 3> element_load(const Mesh& mesh, std::ptrdiff_t e, const Field& g, const SimplexRule& rule,
                                   const QuadratureOptions& opts)
{
    const auto v = mesh.element(e);
    std::array<Point, 3> verts{};
    for (std::size_t k = 0; k < v.size(); ++k) {
        verts[k] = mesh.node(v[k]);
    }
    detail::SubSimplex root{};
    root.bary[0] = {1.0, 0.0, 0.0};
    root.bary[1] = {0.0, 1.0, 0.0};
    root.bary[2] = {0.0, 0.0, 1.0};
    std::array<double, 3> acc{0.0, 0.0, 0.0};
    detail::integrate_subsimplex(g, verts, mesh.dim(), mesh.element_measure(e), root, 1.0, rule, opts, 0, acc);
    return acc;
}

/// Load vector b_i = integral of g * phi_i over the domain.
template <class Field>
Eigen::VectorXd load_vector(const Mesh& mesh, const Field& g, const QuadratureOptions& opts = {})
{
    const SimplexRule rule = simplex_rule(mesh.dim(), opts.degree);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
    for (std::ptrdiff_t e = 0; e < mesh.num_elements(); ++e) {
        const auto local = element_load(mesh, e, g, rule, opts);
        const auto v = mesh.element(e);
        for (std::size_t a = 0; a < v.size(); ++a) {
            if (!std::isfinite(local[a])) {
                throw ProjectionError("non-finite quadrature value", e);
            }
            b[v[a]] += local[a];
        }
    }
    return b;
}

}  // namespace fnrd
