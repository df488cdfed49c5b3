#include "rbpimd/rbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rbpimd {

Division::Division(std::vector<std::size_t> order, std::size_t batch_size)
    : order_(std::move(order)), batch_size_(batch_size) {
    if (batch_size_ == 0 || order_.size() % batch_size_ != 0)
        throw InvalidArgument("division: batch size must divide the particle count");
}

bool Division::is_valid() const {
    if (batch_size_ == 0 || order_.size() % batch_size_ != 0) return false;
    std::vector<char> seen(order_.size(), 0);
    for (std::size_t i : order_) {
        if (i >= order_.size() || seen[i]) return false;
        seen[i] = 1;
    }
    return true;
}

namespace {

void check_batch_args(std::size_t n_particles, std::size_t batch_size) {
    if (batch_size < 2 || batch_size > n_particles || n_particles % batch_size != 0) {
        std::ostringstream msg;
        msg << "batch size " << batch_size << " incompatible with " << n_particles
            << " particles (need 2 <= p <= P and p | P)";
        throw InvalidArgument(msg.str());
    }
}

// Uniform index in [0, n) by rejection, so the draw sequence is fixed by the
// standard engine alone and not by a library's distribution implementation.
std::size_t uniform_index(Rng& rng, std::size_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit = Rng::max() - Rng::max() % range;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
}

}  // namespace

Division random_division(std::size_t n_particles, std::size_t batch_size, Rng& rng) {
    check_batch_args(n_particles, batch_size);
    std::vector<std::size_t> order(n_particles);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n_particles - 1; i > 0; --i)
        std::swap(order[i], order[uniform_index(rng, i + 1)]);
    return Division(std::move(order), batch_size);
}

std::vector<std::size_t> random_batch(std::size_t n_particles, std::size_t batch_size,
                                      Rng& rng) {
    if (batch_size < 2 || batch_size > n_particles)
        throw InvalidArgument("random_batch: need 2 <= p <= P");
    std::vector<std::size_t> order(n_particles);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < batch_size; ++i)
        std::swap(order[i], order[i + uniform_index(rng, n_particles - i)]);
    order.resize(batch_size);
    return order;
}

void batch_force(const PairPotential& potential, const BeadGrid& q, const Division& division,
                 ForceField& out, PairCounter* counter) {
    const std::size_t n = q.n_beads();
    const std::size_t np = q.n_particles();
    if (division.n_particles() != np)
        throw InvalidArgument("batch_force: division size does not match particle count");
    const std::size_t p = division.batch_size();
    if (!out.same_shape(q)) out = ForceField(n, np);
    out.fill(0.0);
    const double scale = static_cast<double>(np - 1) / static_cast<double>(p - 1);
    auto flat = q.flat();
    auto f = out.flat();
    for (std::size_t k = 0; k < n; ++k) {
        const double* row = &flat[k * 3 * np];
        double* frow = &f[k * 3 * np];
        for (std::size_t l = 0; l < division.n_batches(); ++l) {
            auto c = division.batch(l);
            for (std::size_t a = 0; a < p; ++a) {
                const std::size_t i = c[a];
                for (std::size_t b = a + 1; b < p; ++b) {
                    const std::size_t j = c[b];
                    const double dx = row[3 * i] - row[3 * j];
                    const double dy = row[3 * i + 1] - row[3 * j + 1];
                    const double dz = row[3 * i + 2] - row[3 * j + 2];
                    const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                    if (r < kSingularRadius) {
                        std::ostringstream msg;
                        msg << "coincident particles " << i << " and " << j << " on bead " << k;
                        throw SingularityError(msg.str());
                    }
                    const double s = scale * potential.derivative_at(r) / r;
                    frow[3 * i] += s * dx;
                    frow[3 * i + 1] += s * dy;
                    frow[3 * i + 2] += s * dz;
                    frow[3 * j] -= s * dx;
                    frow[3 * j + 1] -= s * dy;
                    frow[3 * j + 2] -= s * dz;
                }
            }
        }
    }
    if (counter) counter->evaluations += n * np * (p - 1) / 2;
}

ForceField batch_force(const PairPotential& potential, const BeadGrid& q,
                       const Division& division, PairCounter* counter) {
    ForceField out(q.n_beads(), q.n_particles());
    batch_force(potential, q, division, out, counter);
    return out;
}

double rbm_pairwise_observable(const PairFunction& a, const BeadGrid& q,
                               std::span<const std::size_t> batch) {
    const std::size_t p = batch.size();
    const std::size_t np = q.n_particles();
    if (p < 2 || p > np) throw InvalidArgument("rbm_pairwise_observable: need 2 <= p <= P");
    double total = 0.0;
    for (std::size_t k = 0; k < q.n_beads(); ++k)
        for (std::size_t x = 0; x < p; ++x)
            for (std::size_t y = x + 1; y < p; ++y)
                total += a(q.at(k, batch[x]) - q.at(k, batch[y]));
    const double norm_factor = static_cast<double>(np - 1) /
                               (static_cast<double>(q.n_beads()) * static_cast<double>(p) *
                                static_cast<double>(p - 1));
    return norm_factor * total;
}

}  // namespace rbpimd
