#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbpimd/rbm.hpp"
#include "rbpimd/ring_operator.hpp"
#include "rbpimd/system.hpp"

namespace rbpimd {

enum class Method { Exact, Rbm, Split, RbmSplit };

/// "pmmLang", "pmmLang+RBM", "pmmLang+split", "pmmLang+RBM+split".
std::string_view method_name(Method m);
Method parse_method(std::string_view name);
bool method_uses_rbm(Method m);
bool method_uses_split(Method m);

/// Which interaction-gradient field feeds the B sub-steps.
enum class ForceStrategy { Exact, Rbm, SmoothExact, SmoothRbm };
ForceStrategy force_strategy(Method m, std::size_t batch_size, std::size_t n_particles);

struct DynamicsOptions {
    /// Draw a second division for the closing half-kick instead of reusing the step's one.
    bool fresh_division_per_substep = false;
};

struct StepOutcome {
    std::optional<bool> accepted;   ///< present iff a Metropolis test ran
    std::optional<double> u2_delta; ///< U2(q*) - U2(q) for Metropolis variants
    std::uint64_t pair_evals = 0;
    double elapsed_ms = 0.0;
};

/// The deterministic parts of one BAOAB step for
///   dq = v dt,  dv = -(q + (L^a)^{-1} G(q)) dt - gamma v dt + sqrt(2 gamma (L^a)^{-1} / beta_N) dB.
class Baoab {
public:
    Baoab(const SystemSpec& spec, const RingOperator& ring);

    /// v <- v - (q + pre) dt/2, where pre = (L^a)^{-1} G(q).
    void kick(PhaseState& s, const BeadGrid& pre) const;
    /// q <- q + v dt/2.
    void drift(PhaseState& s) const;
    /// v <- e^{-gamma dt} v + sqrt((1 - e^{-2 gamma dt}) / beta_N) eta.
    void thermostat(PhaseState& s, std::span<const double> eta) const;

private:
    double dt_;
    double friction_decay_;
    double noise_scale_;
};

/// One BAOAB step driven by the gradient field G supplied through `force_at`.
/// `pre` holds (L^a)^{-1} G at s.q on entry and at the new position on exit;
/// `eta` is an N(0, (L^a)^{-1}) column block.
template <class ForceAt>
void baoab_step(const Baoab& integrator, const RingOperator& ring, PhaseState& s, BeadGrid& grad,
                BeadGrid& pre, std::span<const double> eta, ForceAt&& force_at) {
    integrator.kick(s, pre);
    integrator.drift(s);
    integrator.thermostat(s, eta);
    integrator.drift(s);
    force_at(s.q, grad);
    ring.solve(grad.flat(), pre.flat(), grad.n_cols());
    integrator.kick(s, pre);
}

/// One trajectory of pmmLang or one of its RBM / splitting variants.
/// Owns the phase state and the per-purpose random streams of trajectory `trajectory_id`.
class Sampler {
public:
    Sampler(const SystemSpec& spec, Method method, std::uint64_t trajectory_id = 0,
            DynamicsOptions options = {});
    /// Shares a ring operator (for ensembles). The operator must match the spec.
    Sampler(const SystemSpec& spec, Method method, std::shared_ptr<const RingOperator> ring,
            std::uint64_t trajectory_id = 0, DynamicsOptions options = {});

    /// Replaces the phase state (e.g. from a snapshot) and refreshes cached forces.
    void set_state(PhaseState state);
    const PhaseState& state() const { return state_; }

    /// Advances one step, drawing the thermostat noise from this trajectory's stream.
    StepOutcome step();
    /// Advances one step with externally supplied thermostat noise (N x 3P, covariance (L^a)^{-1}).
    StepOutcome step_with_noise(std::span<const double> eta);
    /// Draws the next thermostat noise block from this trajectory's noise stream.
    void draw_noise(std::span<double> eta);

    const SystemSpec& spec() const { return spec_; }
    Method method() const { return method_; }
    ForceStrategy strategy() const { return strategy_; }
    const RingOperator& ring() const { return *ring_; }
    std::shared_ptr<const RingOperator> shared_ring() const { return ring_; }
    /// Random stream reserved for stochastic weight estimates.
    Rng& weight_rng() { return weight_rng_; }

    double time() const { return static_cast<double>(steps_) * spec_.dt; }
    std::uint64_t steps_taken() const { return steps_; }
    std::uint64_t rejections() const { return rejections_; }
    std::uint64_t metropolis_tests() const { return tests_; }
    std::uint64_t pair_evals() const { return counter_.evaluations; }
    /// Gradient field driving the last B sub-step (at the current q for exact strategies).
    const ForceField& gradient() const { return grad_; }
    /// Cached U2 at the current state (split methods only).
    double u2() const { return u2_; }

private:
    void refresh_cache();
    void exact_gradient(const BeadGrid& q, ForceField& out);

    SystemSpec spec_;
    Method method_;
    ForceStrategy strategy_;
    DynamicsOptions options_;
    std::shared_ptr<const RingOperator> ring_;
    Baoab integrator_;
    PairPotential drive_;  ///< potential whose gradient drives the B sub-steps

    Rng noise_rng_;
    Rng batch_rng_;
    Rng metropolis_rng_;
    Rng weight_rng_;

    PhaseState state_;
    ForceField grad_;
    BeadGrid pre_;
    double u2_ = 0.0;

    // Scratch for proposals and noise.
    PhaseState saved_;
    ForceField saved_grad_;
    BeadGrid saved_pre_;
    std::vector<double> eta_;

    PairCounter counter_;
    std::uint64_t steps_ = 0;
    std::uint64_t rejections_ = 0;
    std::uint64_t tests_ = 0;
};

/// Metropolis acceptance min(1, exp(-beta_N (u2_new - u2_old))); 0 for an infinite u2_new.
double split_acceptance(double beta_n, double u2_old, double u2_new);

struct CoupledResult {
    std::vector<double> times;
    /// sqrt(mean over replicas of |q_rbm(t) - q_exact(t)|^2), Frobenius over all N x 3P entries.
    std::vector<double> strong_error;
    /// Final states of replica 0 (exact, rbm).
    PhaseState exact_final;
    PhaseState rbm_final;
};

/// Runs `replicas` pairs of exact / RBM trajectories from a shared initial state
/// with shared thermostat noise and reports e(t) every `stride` steps.
CoupledResult coupled_run(const SystemSpec& spec, std::size_t steps, std::size_t replicas,
                          std::size_t stride = 1, unsigned threads = 1);

}  // namespace rbpimd
