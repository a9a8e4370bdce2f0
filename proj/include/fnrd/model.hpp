#pragma once

/**
 * @file model.hpp
 * @brief Field-Noyes parameters, the pointwise nonlinearity and the catalog
 *        of nonsmooth initial data.
 *
 * The linear part of each species is split off as a_i * Laplacian - b_i with
 * b = (1/lambda, 1, rho/delta), so every species operator is negative definite
 * under Neumann conditions. The remaining reaction terms form f(u):
 *
 *   f1 = (rho*u3 - u1*u3 + 2*u1 - u1^2) / lambda
 *   f2 = u1
 *   f3 = (-u1*u3 + c*u2) / delta
 *
 * (the 2*u1 absorbs the +u1/lambda moved into the linear part).
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fnrd/errors.hpp"
#include "fnrd/mesh.hpp"
#include "fnrd/quadrature.hpp"

namespace fnrd {

inline constexpr int kNumSpecies = 3;

struct ModelParams {
    std::array<double, 3> a{1.0, 1.0, 1.0};
    double lambda = 0.1;
    double delta = 0.1;
    double rho = 0.25;
    double c = 1.0;

    /// Linear shift of species i (0-based).
    [[nodiscard]] double b(int species) const
    {
        switch (species) {
        case 0: return 1.0 / lambda;
        case 1: return 1.0;
        case 2: return rho / delta;
        default: throw ConfigError("species index out of range: " + std::to_string(species));
        }
    }

    void validate() const
    {
        const std::array<std::pair<const char*, double>, 7> named{{{"a1", a[0]},
                                                                   {"a2", a[1]},
                                                                   {"a3", a[2]},
                                                                   {"lambda", lambda},
                                                                   {"delta", delta},
                                                                   {"rho", rho},
                                                                   {"c", c}}};
        for (const auto& [name, value] : named) {
            if (!(value > 0.0) || !std::isfinite(value)) {
                throw ConfigError(std::string("model parameter ") + name + " must be positive and finite");
            }
        }
    }
};

/// f(u1, u2, u3). Inlined into the load assembly hot loop, so the finiteness
/// check is left to the caller there; this entry point checks.
inline std::array<double, 3> eval_f_unchecked(const ModelParams& p, double u1, double u2, double u3) noexcept
{
    return {(p.rho * u3 - u1 * u3 + 2.0 * u1 - u1 * u1) / p.lambda, u1, (-u1 * u3 + p.c * u2) / p.delta};
}

inline std::array<double, 3> eval_f(const ModelParams& p, double u1, double u2, double u3)
{
    if (!std::isfinite(u1) || !std::isfinite(u2) || !std::isfinite(u3)) {
        throw BlowUpError("non-finite state value passed to the nonlinearity");
    }
    return eval_f_unchecked(p, u1, u2, u3);
}

enum class DatumId { step, radial, sqrt_product, kink, custom };

/// Convergence orders predicted for a datum of regularity gamma (epsilon -> 0).
struct RateRecord {
    double spatial_l2 = 2.0;
    double spatial_h1 = 1.0;
    double temporal = 2.0;
    double first_step_l2 = 2.0;
    double first_step_h1 = 1.5;
};

inline RateRecord rates_for_gamma(double gamma)
{
    RateRecord r;
    r.temporal = std::min(1.0 + gamma, 2.0);
    r.first_step_l2 = std::max(-1.0, gamma - 2.0) / 2.0 + r.temporal;
    r.first_step_h1 = r.first_step_l2 - 0.5;
    return r;
}

/**
 * Initial datum u_{0,1}; all three species start from the same field.
 *
 *   i    0.5 * sgn(x2 - 0.5) + 0.5          gamma = 1/2   (sgn(0) = 0)
 *   ii   (x1^2 + x2^2)^(-1/8) - 0.8         gamma = 3/4
 *   iii  x1^(1/2) * x2                      gamma = 1
 *   iv   |x2 - x1|                          gamma = 3/2
 *
 * Custom data are either a constant or a list of nodal values on a fixed mesh.
 */
class InitialDatum {
public:
    static InitialDatum builtin(DatumId id)
    {
        if (id == DatumId::custom) {
            throw ConfigError("use InitialDatum::constant or InitialDatum::nodal for custom data");
        }
        InitialDatum d;
        d.id_ = id;
        return d;
    }

    static InitialDatum constant(double value, std::optional<double> gamma = std::nullopt)
    {
        InitialDatum d;
        d.id_ = DatumId::custom;
        d.constant_ = value;
        d.gamma_ = gamma;
        return d;
    }

    /// Nodal values of a P1 function on the mesh of the given dim/level. On
    /// other meshes the datum is the piecewise-linear function they define.
    static InitialDatum nodal(int dim, int level, std::vector<double> values,
                              std::optional<double> gamma = std::nullopt)
    {
        auto mesh = std::make_shared<const Mesh>(dim, level);
        if (static_cast<std::ptrdiff_t>(values.size()) != mesh->num_nodes()) {
            throw ConfigError("nodal datum has " + std::to_string(values.size()) + " values, the level " +
                              std::to_string(level) + " mesh has " + std::to_string(mesh->num_nodes()) + " nodes");
        }
        InitialDatum d;
        d.id_ = DatumId::custom;
        d.nodal_mesh_ = std::move(mesh);
        d.nodal_ = std::move(values);
        d.gamma_ = gamma;
        return d;
    }

    static InitialDatum parse(std::string_view name)
    {
        if (name == "i") return builtin(DatumId::step);
        if (name == "ii") return builtin(DatumId::radial);
        if (name == "iii") return builtin(DatumId::sqrt_product);
        if (name == "iv") return builtin(DatumId::kink);
        throw ConfigError("unknown datum '" + std::string(name) + "' (expected i, ii, iii or iv)");
    }

    [[nodiscard]] DatumId id() const noexcept { return id_; }
    [[nodiscard]] bool is_nodal() const noexcept { return !nodal_.empty(); }
    [[nodiscard]] const std::vector<double>& nodal_values() const noexcept { return nodal_; }
    [[nodiscard]] int nodal_dim() const noexcept { return nodal_mesh_ ? nodal_mesh_->dim() : 0; }
    [[nodiscard]] int nodal_level() const noexcept { return nodal_mesh_ ? nodal_mesh_->level() : 0; }
    [[nodiscard]] std::optional<double> constant_value() const noexcept { return constant_; }

    [[nodiscard]] std::string name() const
    {
        switch (id_) {
        case DatumId::step: return "i";
        case DatumId::radial: return "ii";
        case DatumId::sqrt_product: return "iii";
        case DatumId::kink: return "iv";
        case DatumId::custom: break;
        }
        return "custom";
    }

    /// Nominal regularity: u0 in H^gamma for every smaller exponent.
    [[nodiscard]] std::optional<double> gamma() const noexcept
    {
        switch (id_) {
        case DatumId::step: return 0.5;
        case DatumId::radial: return 0.75;
        case DatumId::sqrt_product: return 1.0;
        case DatumId::kink: return 1.5;
        case DatumId::custom: break;
        }
        return gamma_;
    }

    [[nodiscard]] bool requires_2d() const noexcept { return id_ != DatumId::custom; }

    [[nodiscard]] double operator()(const Point& x) const
    {
        const double x1 = x[0];
        const double x2 = x[1];
        switch (id_) {
        case DatumId::step: {
            const double s = x2 > 0.5 ? 1.0 : (x2 < 0.5 ? -1.0 : 0.0);
            return 0.5 * s + 0.5;
        }
        case DatumId::radial: {
            const double r2 = x1 * x1 + x2 * x2;
            if (r2 == 0.0) {
                throw SingularEvaluationError("datum ii is singular at the origin");
            }
            return std::pow(r2, -0.125) - 0.8;
        }
        case DatumId::sqrt_product: return std::sqrt(x1) * x2;
        case DatumId::kink: return std::abs(x2 - x1);
        case DatumId::custom: break;
        }
        if (constant_) {
            return *constant_;
        }
        return nodal_mesh_->evaluate(Eigen::Map<const Eigen::VectorXd>(nodal_.data(), static_cast<Eigen::Index>(nodal_.size())), x);
    }

    /// Quadrature settings for projecting this datum: refinement towards the
    /// origin for ii and towards the edge x1 = 0 for iii. The jump of i and the
    /// kink of iv lie on mesh lines at every level, so the plain rule suffices.
    [[nodiscard]] QuadratureOptions quadrature() const
    {
        QuadratureOptions opts;
        opts.degree = 4;
        switch (id_) {
        case DatumId::radial:
            opts.locus = [](const Point& p) { return std::hypot(p[0], p[1]); };
            opts.max_depth = 14;
            opts.near_ratio = 2.0;
            break;
        case DatumId::sqrt_product:
            opts.locus = [](const Point& p) { return p[0]; };
            opts.max_depth = 6;
            break;
        default: break;
        }
        return opts;
    }

private:
    InitialDatum() = default;

    DatumId id_ = DatumId::custom;
    std::optional<double> constant_;
    std::optional<double> gamma_;
    std::vector<double> nodal_;
    std::shared_ptr<const Mesh> nodal_mesh_;
};

inline RateRecord expected_orders(const InitialDatum& datum)
{
    const auto gamma = datum.gamma();
    if (!gamma) {
        throw ConfigError("custom datum has no regularity exponent gamma; cannot derive expected orders");
    }
    return rates_for_gamma(*gamma);
}

}  // namespace fnrd
