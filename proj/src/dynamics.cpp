#include "rbpimd/dynamics.hpp"

#include <chrono>
#include <cmath>

#include "parallel.hpp"

namespace rbpimd {

std::string_view method_name(Method m) {
    switch (m) {
    case Method::Exact: return "pmmLang";
    case Method::Rbm: return "pmmLang+RBM";
    case Method::Split: return "pmmLang+split";
    case Method::RbmSplit: return "pmmLang+RBM+split";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    for (Method m : {Method::Exact, Method::Rbm, Method::Split, Method::RbmSplit})
        if (name == method_name(m)) return m;
    throw ConfigError("unknown method '" + std::string(name) +
                      "' (expected pmmLang, pmmLang+RBM, pmmLang+split or pmmLang+RBM+split)");
}

bool method_uses_rbm(Method m) { return m == Method::Rbm || m == Method::RbmSplit; }
bool method_uses_split(Method m) { return m == Method::Split || m == Method::RbmSplit; }

ForceStrategy force_strategy(Method m, std::size_t batch_size, std::size_t n_particles) {
    // A single batch holding every particle is the exact force.
    const bool batched = method_uses_rbm(m) && batch_size < n_particles;
    if (method_uses_split(m)) return batched ? ForceStrategy::SmoothRbm : ForceStrategy::SmoothExact;
    return batched ? ForceStrategy::Rbm : ForceStrategy::Exact;
}

Baoab::Baoab(const SystemSpec& spec, const RingOperator&)
    : dt_(spec.dt),
      friction_decay_(std::exp(-spec.gamma * spec.dt)),
      noise_scale_(std::sqrt(-std::expm1(-2.0 * spec.gamma * spec.dt) / spec.beta_n())) {}

void Baoab::kick(PhaseState& s, const BeadGrid& pre) const {
    auto v = s.v.flat();
    auto q = s.q.flat();
    auto f = pre.flat();
    const double h = 0.5 * dt_;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= (q[i] + f[i]) * h;
}

void Baoab::drift(PhaseState& s) const {
    auto v = s.v.flat();
    auto q = s.q.flat();
    const double h = 0.5 * dt_;
    for (std::size_t i = 0; i < v.size(); ++i) q[i] += v[i] * h;
}

void Baoab::thermostat(PhaseState& s, std::span<const double> eta) const {
    auto v = s.v.flat();
    if (eta.size() != v.size()) throw InvalidArgument("thermostat: noise block has wrong size");
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = friction_decay_ * v[i] + noise_scale_ * eta[i];
}

double split_acceptance(double beta_n, double u2_old, double u2_new) {
    if (std::isinf(u2_new)) return 0.0;
    const double delta = u2_new - u2_old;
    if (delta <= 0.0) return 1.0;
    return std::exp(-beta_n * delta);
}

namespace {

std::shared_ptr<const RingOperator> make_ring(const SystemSpec& spec) {
    spec.validate();
    return std::make_shared<const RingOperator>(spec.n_beads, spec.mass, spec.beta, spec.alpha);
}

}  // namespace

Sampler::Sampler(const SystemSpec& spec, Method method, std::uint64_t trajectory_id,
                 DynamicsOptions options)
    : Sampler(spec, method, make_ring(spec), trajectory_id, options) {}

Sampler::Sampler(const SystemSpec& spec, Method method, std::shared_ptr<const RingOperator> ring,
                 std::uint64_t trajectory_id, DynamicsOptions options)
    : spec_(spec),
      method_(method),
      strategy_(force_strategy(method, spec.batch_size, spec.n_particles)),
      options_(options),
      ring_(std::move(ring)),
      integrator_(spec, *ring_),
      drive_(method_uses_split(method) ? spec.potential.smooth() : spec.potential),
      noise_rng_(make_rng(spec.seed, trajectory_id, Stream::Noise)),
      batch_rng_(make_rng(spec.seed, trajectory_id, Stream::Batch)),
      metropolis_rng_(make_rng(spec.seed, trajectory_id, Stream::Metropolis)),
      weight_rng_(make_rng(spec.seed, trajectory_id, Stream::Weight)) {
    spec_.validate();
    if (ring_->n_beads() != spec.n_beads || ring_->alpha() != spec.alpha ||
        ring_->mass() != spec.mass || ring_->beta_n() != spec.beta_n())
        throw InvalidArgument("sampler: ring operator does not match the system spec");
    if (method_uses_split(method) && !spec.potential.is_mixed_family())
        throw ConfigError("method: splitting requires the mixed Coulomb/Lennard-Jones potential");
    Rng init = make_rng(spec.seed, trajectory_id, Stream::Init);
    set_state(init_state(spec_, *ring_, init));
}

void Sampler::exact_gradient(const BeadGrid& q, ForceField& out) {
    full_interaction_force(drive_, q, out, &counter_);
}

void Sampler::refresh_cache() {
    pre_ = BeadGrid(spec_.n_beads, spec_.n_particles);
    grad_ = ForceField(spec_.n_beads, spec_.n_particles);
    if (strategy_ == ForceStrategy::Exact || strategy_ == ForceStrategy::SmoothExact) {
        exact_gradient(state_.q, grad_);
        ring_->solve(grad_.flat(), pre_.flat(), grad_.n_cols());
    }
    if (method_uses_split(method_)) u2_ = u2_cutoff(spec_.potential, state_.q);
}

void Sampler::set_state(PhaseState state) {
    if (state.q.n_beads() != spec_.n_beads || state.q.n_particles() != spec_.n_particles ||
        !state.v.same_shape(state.q))
        throw InvalidArgument("sampler: state shape does not match the system spec");
    state_ = std::move(state);
    eta_.assign(state_.v.size(), 0.0);
    refresh_cache();
}

void Sampler::draw_noise(std::span<double> eta) {
    ring_->sample_gaussian(noise_rng_, eta, spec_.n_particles * 3);
}

StepOutcome Sampler::step() {
    draw_noise(eta_);
    return step_with_noise(eta_);
}

StepOutcome Sampler::step_with_noise(std::span<const double> eta) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t evals_before = counter_.evaluations;
    const bool split = method_uses_split(method_);
    if (split) {
        saved_ = state_;
        saved_grad_ = grad_;
        saved_pre_ = pre_;
    }

    bool singular_proposal = false;
    try {
        if (strategy_ == ForceStrategy::Exact || strategy_ == ForceStrategy::SmoothExact) {
            baoab_step(integrator_, *ring_, state_, grad_, pre_, eta,
                       [this](const BeadGrid& q, ForceField& out) { exact_gradient(q, out); });
        } else {
            const std::size_t np = spec_.n_particles;
            const std::size_t p = spec_.batch_size;
            Division division = random_division(np, p, batch_rng_);
            batch_force(drive_, state_.q, division, grad_, &counter_);
            ring_->solve(grad_.flat(), pre_.flat(), grad_.n_cols());
            baoab_step(integrator_, *ring_, state_, grad_, pre_, eta,
                       [&](const BeadGrid& q, ForceField& out) {
                           if (options_.fresh_division_per_substep)
                               division = random_division(np, p, batch_rng_);
                           batch_force(drive_, q, division, out, &counter_);
                       });
        }
    } catch (const SingularityError&) {
        // Only the smooth part drives split proposals; a coincident pair there is
        // a proposal inside the singular core and is rejected like one.
        if (!split) throw;
        singular_proposal = true;
    }

    StepOutcome outcome;
    if (split) {
        const double u2_new = singular_proposal ? std::numeric_limits<double>::infinity()
                                                : u2_cutoff(spec_.potential, state_.q);
        const double a = split_acceptance(spec_.beta_n(), u2_, u2_new);
        const double u = uniform01(metropolis_rng_);
        ++tests_;
        const bool accepted = u < a;
        outcome.accepted = accepted;
        outcome.u2_delta = u2_new - u2_;
        if (accepted) {
            u2_ = u2_new;
        } else {
            std::swap(state_, saved_);
            for (double& x : state_.v.flat()) x = -x;
            std::swap(grad_, saved_grad_);
            std::swap(pre_, saved_pre_);
            ++rejections_;
        }
    }

    ++steps_;
    outcome.pair_evals = counter_.evaluations - evals_before;
    outcome.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    return outcome;
}

CoupledResult coupled_run(const SystemSpec& spec, std::size_t steps, std::size_t replicas,
                          std::size_t stride, unsigned threads) {
    if (replicas == 0) throw InvalidArgument("coupled_run: need at least one replica");
    if (stride == 0) throw InvalidArgument("coupled_run: stride must be positive");
    auto ring = make_ring(spec);
    const std::size_t n_out = steps / stride + 1;

    std::vector<std::vector<double>> sq(replicas, std::vector<double>(n_out, 0.0));
    CoupledResult result;
    detail::parallel_for(replicas, threads, [&](std::size_t r) {
        Sampler exact(spec, Method::Exact, ring, r);
        Sampler rbm(spec, Method::Rbm, ring, r);
        std::vector<double> eta(exact.state().v.size());
        auto distance2 = [&] {
            auto a = exact.state().q.flat();
            auto b = rbm.state().q.flat();
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
            return s;
        };
        sq[r][0] = distance2();
        for (std::size_t j = 1; j <= steps; ++j) {
            exact.draw_noise(eta);
            exact.step_with_noise(eta);
            rbm.step_with_noise(eta);
            if (j % stride == 0) sq[r][j / stride] = distance2();
        }
        if (r == 0) {
            result.exact_final = exact.state();
            result.rbm_final = rbm.state();
        }
    });

    result.times.resize(n_out);
    result.strong_error.assign(n_out, 0.0);
    for (std::size_t i = 0; i < n_out; ++i) {
        result.times[i] = static_cast<double>(i * stride) * spec.dt;
        double s = 0.0;
        for (std::size_t r = 0; r < replicas; ++r) s += sq[r][i];
        result.strong_error[i] = std::sqrt(s / static_cast<double>(replicas));
    }
    return result;
}

}  // namespace rbpimd
