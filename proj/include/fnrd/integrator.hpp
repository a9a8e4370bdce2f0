#pragma once

/**
 * @file integrator.hpp
 * @brief Second-order exponential Runge-Kutta integration of
 *        du/dt = A_h u + f_h(u) in phi-function form.
 *
 * One step of size dt, with E = exp(dt A_h) and phi_k = phi_k(dt A_h):
 *
 *   inner stage   v       = E u_n + dt phi_1 F_n,                       F_n = f_h(u_n)
 *   update        u_{n+1} = E u_n + dt [(phi_1 - phi_2) F_n + phi_2 F_v], F_v = f_h(v)
 *
 * which is the variation-of-constants formula with f_h frozen at u_n (inner
 * stage) and linearly interpolated between u_n and v (update), integrated
 * exactly. All operator functions are diagonal in the modal basis of the
 * system, so a step costs two nonlinearity evaluations and two transforms
 * back to nodal values.
 */

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fnrd/assembly.hpp"
#include "fnrd/discretization.hpp"
#include "fnrd/errors.hpp"
#include "fnrd/model.hpp"
#include "fnrd/spectral.hpp"

namespace fnrd {

/// A semilinear system whose linear part is diagonal in a modal basis.
/// Nodal and modal data are matrices with one column per component.
template <class S>
concept ExponentialSystem = requires(const S& sys, const Eigen::MatrixXd& x) {
    /// mu >= 0 per mode and component: the linear part acts as -mu.
    { sys.rates() } -> std::convertible_to<Eigen::MatrixXd>;
    { sys.to_modal(x) } -> std::convertible_to<Eigen::MatrixXd>;
    { sys.from_modal(x) } -> std::convertible_to<Eigen::MatrixXd>;
    /// Modal coefficients of the projected nonlinearity at nodal state x.
    { sys.nonlinearity_modal(x) } -> std::convertible_to<Eigen::MatrixXd>;
};

/// exp, phi_1 and phi_2 of (-dt mu), elementwise.
struct StepMultipliers {
    double dt = 0.0;
    Eigen::ArrayXXd e;
    Eigen::ArrayXXd p1;
    Eigen::ArrayXXd p2;

    static StepMultipliers compute(const Eigen::MatrixXd& rates, double dt)
    {
        StepMultipliers m{dt, Eigen::ArrayXXd(rates.rows(), rates.cols()), Eigen::ArrayXXd(rates.rows(), rates.cols()),
                          Eigen::ArrayXXd(rates.rows(), rates.cols())};
        for (Eigen::Index c = 0; c < rates.cols(); ++c) {
            for (Eigen::Index r = 0; r < rates.rows(); ++r) {
                const double z = -dt * rates(r, c);
                m.e(r, c) = phi_scalar(0, z);
                m.p1(r, c) = phi_scalar(1, z);
                m.p2(r, c) = phi_scalar(2, z);
            }
        }
        return m;
    }
};

/// Fixed-step ERK2 stepper with multipliers cached for one dt.
template <ExponentialSystem System>
class Erk2Stepper {
public:
    Erk2Stepper(const System& system, double dt) : system_(&system)
    {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw ConfigError("time step must be positive, got " + std::to_string(dt));
        }
        mult_ = StepMultipliers::compute(system.rates(), dt);
    }

    [[nodiscard]] double dt() const noexcept { return mult_.dt; }

    /// Advances nodal u and its modal coefficients c by one step.
    void advance(Eigen::MatrixXd& u, Eigen::MatrixXd& c, long step) const
    {
        try {
            const double dt = mult_.dt;
            const Eigen::ArrayXXd fn = system_->nonlinearity_modal(u).array();
            const Eigen::ArrayXXd propagated = mult_.e * c.array();
            const Eigen::MatrixXd stage_modal = (propagated + dt * mult_.p1 * fn).matrix();
            const Eigen::MatrixXd stage = system_->from_modal(stage_modal);
            if (!stage.allFinite()) {
                throw BlowUpError("non-finite inner stage", step);
            }
            const Eigen::ArrayXXd fv = system_->nonlinearity_modal(stage).array();
            c = (propagated + dt * ((mult_.p1 - mult_.p2) * fn + mult_.p2 * fv)).matrix();
            u = system_->from_modal(c);
            if (!u.allFinite()) {
                throw BlowUpError("non-finite state", step);
            }
        } catch (const BlowUpError& e) {
            if (e.step() >= 0) {
                throw;
            }
            throw BlowUpError(e.what(), step);
        }
    }

private:
    const System* system_;
    StepMultipliers mult_;
};

struct State {
    double t = 0.0;
    /// Nodal P1 coefficients, one column per species.
    Eigen::MatrixXd u;

    [[nodiscard]] auto species(int i) { return u.col(i); }
    [[nodiscard]] auto species(int i) const { return u.col(i); }
};

/// Called with (completed step count, state after that step).
using SnapshotHook = std::function<void(long, const State&)>;

struct IntegrateOptions {
    SnapshotHook hook;
    /// Step counts at which the hook fires; empty means after every step.
    std::vector<long> snapshot_steps;
    double t_max = std::numeric_limits<double>::infinity();
};

template <ExponentialSystem System>
State erk2_step(const System& system, const State& state, double dt)
{
    if (!state.u.allFinite()) {
        throw BlowUpError("non-finite initial state", 0);
    }
    const Erk2Stepper<System> stepper(system, dt);
    State out{state.t + dt, state.u};
    Eigen::MatrixXd c = system.to_modal(state.u);
    stepper.advance(out.u, c, 1);
    return out;
}

template <ExponentialSystem System>
State integrate(const System& system, const State& state0, double dt, long n_steps, const IntegrateOptions& opts = {})
{
    if (n_steps < 1) {
        throw ConfigError("integrate needs at least one step");
    }
    if (dt * static_cast<double>(n_steps) > opts.t_max * (1.0 + 1e-12)) {
        throw ConfigError("integration span " + std::to_string(dt * static_cast<double>(n_steps)) +
                          " exceeds the configured maximum " + std::to_string(opts.t_max));
    }
    if (!state0.u.allFinite()) {
        throw BlowUpError("non-finite initial state", 0);
    }
    const Erk2Stepper<System> stepper(system, dt);
    State state = state0;
    Eigen::MatrixXd c = system.to_modal(state.u);
    auto snapshot_due = [&](long k) {
        if (!opts.hook) {
            return false;
        }
        if (opts.snapshot_steps.empty()) {
            return true;
        }
        return std::find(opts.snapshot_steps.begin(), opts.snapshot_steps.end(), k) != opts.snapshot_steps.end();
    };
    for (long k = 1; k <= n_steps; ++k) {
        stepper.advance(state.u, c, k);
        state.t = state0.t + static_cast<double>(k) * dt;
        if (snapshot_due(k)) {
            opts.hook(k, state);
        }
    }
    return state;
}

// ---------------------------------------------------------------------------
// The Galerkin Field-Noyes system
// ---------------------------------------------------------------------------

enum class NonlinearityMode {
    field_noyes,  ///< f_h(u) = P_h f(u_h)
    zero,         ///< f_h = 0: pure semigroup
    supplied,     ///< f_h = fixed nodal vector (one column per species)
};

class FemSystem {
public:
    FemSystem(DiscretizationPtr disc, ModelParams params, NonlinearityMode mode = NonlinearityMode::field_noyes,
              const Eigen::MatrixXd& supplied = {})
        : disc_(std::move(disc)), params_(params), mode_(mode)
    {
        params_.validate();
        const PencilSpectrum& spec = disc_->spectrum();
        rates_.resize(spec.size(), kNumSpecies);
        for (int i = 0; i < kNumSpecies; ++i) {
            rates_.col(i) = SpeciesOperator::for_species(params_, i).rates(spec);
        }
        if (mode_ == NonlinearityMode::supplied) {
            if (supplied.rows() != spec.size() || supplied.cols() != kNumSpecies) {
                throw MeshMismatchError("supplied nonlinearity must be " + std::to_string(spec.size()) + "x3");
            }
            supplied_modal_ = to_modal(supplied);
        }
    }

    [[nodiscard]] const Discretization& discretization() const noexcept { return *disc_; }
    [[nodiscard]] const DiscretizationPtr& discretization_ptr() const noexcept { return disc_; }
    [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
    [[nodiscard]] NonlinearityMode mode() const noexcept { return mode_; }

    [[nodiscard]] const Eigen::MatrixXd& rates() const noexcept { return rates_; }

    [[nodiscard]] Eigen::MatrixXd to_modal(const Eigen::MatrixXd& u) const
    {
        return modal_transform(disc_->spectrum(), disc_->mass(), u, ModalDirection::to_modal);
    }

    [[nodiscard]] Eigen::MatrixXd from_modal(const Eigen::MatrixXd& c) const
    {
        return modal_transform(disc_->spectrum(), disc_->mass(), c, ModalDirection::from_modal);
    }

    /// Phi^T M P_h f(u) = Phi^T b with b the load vector, so no mass solve is needed.
    [[nodiscard]] Eigen::MatrixXd nonlinearity_modal(const Eigen::MatrixXd& u) const
    {
        switch (mode_) {
        case NonlinearityMode::field_noyes:
            return detail::transpose_times(disc_->spectrum().phi(), nonlinearity_load(disc_->mesh(), params_, u));
        case NonlinearityMode::zero: return Eigen::MatrixXd::Zero(u.rows(), u.cols());
        case NonlinearityMode::supplied: return supplied_modal_;
        }
        return {};
    }

    /// Initial state with every species set to P_h u0.
    [[nodiscard]] State initial_state(const InitialDatum& datum) const
    {
        const Eigen::VectorXd u0 = project_datum(disc_->mesh(), disc_->mass_solver(), datum);
        State s{0.0, Eigen::MatrixXd(u0.size(), kNumSpecies)};
        for (int i = 0; i < kNumSpecies; ++i) {
            s.u.col(i) = u0;
        }
        return s;
    }

private:
    DiscretizationPtr disc_;
    ModelParams params_;
    NonlinearityMode mode_;
    Eigen::MatrixXd rates_;
    Eigen::MatrixXd supplied_modal_;
};

static_assert(ExponentialSystem<FemSystem>);

}  // namespace fnrd
