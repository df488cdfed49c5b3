#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>

#include "rbpimd/potentials.hpp"
#include "rbpimd/random.hpp"
#include "rbpimd/ring_operator.hpp"
#include "rbpimd/types.hpp"

namespace rbpimd {

/// Physical and numerical configuration of one ring-polymer system.
struct SystemSpec {
    double mass = 1.0;
    double beta = 4.0;
    std::size_t n_beads = 16;
    std::size_t n_particles = 8;
    /// Regularization of the mass matrix; the harmonic confinement uses the same value.
    double alpha = 0.25;
    double gamma = 2.0;
    double dt = 1.0 / 16.0;
    std::size_t batch_size = 2;
    PairPotential potential = PairPotential::coulomb(1.0);
    std::uint64_t seed = 1;
    double total_time = 100.0;

    double beta_n() const { return beta / static_cast<double>(n_beads); }
    ExternalPotential external() const { return ExternalPotential(alpha); }
    std::size_t steps() const;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// alpha = P^{-2/3}.
double default_alpha(std::size_t n_particles);

/// Counts pair-potential evaluations; reset by the caller.
struct PairCounter {
    std::uint64_t evaluations = 0;
};

/// Exact interaction gradient field, Theta(N P^2) pair terms.
/// Throws SingularityError naming bead and pair on coincident particles.
ForceField full_interaction_force(const PairPotential& potential, const BeadGrid& q,
                                  PairCounter* counter = nullptr);
void full_interaction_force(const PairPotential& potential, const BeadGrid& q, ForceField& out,
                            PairCounter* counter = nullptr);

/// Sum over beads and pairs of the interaction potential.
double u_alpha(const PairPotential& potential, const BeadGrid& q);

/// Sum of the singular (short-ranged) part over bead-pairs closer than sigma.
/// Returns +infinity when a counted pair is numerically coincident.
double u2_cutoff(const PairPotential& potential, const BeadGrid& q);

/// Draws a starting phase-space point: particle centres i.i.d. Gaussian with
/// per-coordinate standard deviation P^{1/3}, replicated on every bead plus
/// a small per-bead jitter; velocities from N(0, (beta_N L^alpha)^{-1}).
/// Centres are redrawn until every same-bead pair is at least
/// `min_pair_distance` apart.
PhaseState init_state(const SystemSpec& spec, const RingOperator& ring, Rng& rng);

/// Minimum same-bead pair distance used by init_state for a spec.
double init_min_pair_distance(const SystemSpec& spec);

/// Smallest same-bead pair distance in q (infinity for P < 2).
double min_pair_distance(const BeadGrid& q);

// Snapshot format (little-endian):
//   char[8]  "RBPIMDQ1"
//   uint32   n_beads, uint32 n_particles, uint32 has_velocity (0/1), uint32 reserved
//   double   q[n_beads][n_particles][3]            bead-major
//   double   v[n_beads][n_particles][3]            only if has_velocity
void save_snapshot(const std::filesystem::path& path, const BeadGrid& q,
                   const BeadGrid* v = nullptr);
/// Loads a snapshot; `v` is left empty when the file carries no velocities.
void load_snapshot(const std::filesystem::path& path, BeadGrid& q, BeadGrid& v);

/// CSV dump: "# rbpimd snapshot N=<n> P=<p>", header "bead,particle,x,y,z".
void save_snapshot_csv(const std::filesystem::path& path, const BeadGrid& q);

}  // namespace rbpimd
