#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rbpimd/potentials.hpp"
#include "rbpimd/random.hpp"
#include "rbpimd/system.hpp"
#include "rbpimd/types.hpp"

namespace rbpimd {

/// Partition of {0..P-1} into P/p batches of size p. Stored as the
/// permutation whose consecutive blocks of length p are the batches.
class Division {
public:
    Division() = default;
    Division(std::vector<std::size_t> order, std::size_t batch_size);

    std::size_t n_particles() const { return order_.size(); }
    std::size_t batch_size() const { return batch_size_; }
    std::size_t n_batches() const { return batch_size_ ? order_.size() / batch_size_ : 0; }
    std::span<const std::size_t> batch(std::size_t l) const {
        return {order_.data() + l * batch_size_, batch_size_};
    }
    std::span<const std::size_t> order() const { return order_; }

    /// Disjoint, covering, equal-sized batches.
    bool is_valid() const;

private:
    std::vector<std::size_t> order_;
    std::size_t batch_size_ = 0;
};

/// Fisher-Yates permutation cut into consecutive blocks. O(P).
Division random_division(std::size_t n_particles, std::size_t batch_size, Rng& rng);

/// A uniformly random p-subset of the particles (first block of a partial shuffle).
std::vector<std::size_t> random_batch(std::size_t n_particles, std::size_t batch_size, Rng& rng);

/// Batch-approximated gradient field: for i in batch C,
/// (P-1)/(p-1) * sum_{j in C, j != i} grad V(q^i - q^j), per bead.
void batch_force(const PairPotential& potential, const BeadGrid& q, const Division& division,
                 ForceField& out, PairCounter* counter = nullptr);
ForceField batch_force(const PairPotential& potential, const BeadGrid& q,
                       const Division& division, PairCounter* counter = nullptr);

using PairFunction = std::function<double(const Vec3&)>;

/// (P-1)/(N p (p-1)) sum_k sum_{i<j in batch} a(q_k^i - q_k^j).
double rbm_pairwise_observable(const PairFunction& a, const BeadGrid& q,
                               std::span<const std::size_t> batch);

}  // namespace rbpimd
