#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "rbpimd/random.hpp"

namespace rbpimd {

/// The ring-polymer stiffness matrix L = (m / beta_N^2) * (2I - S - S^T), S the
/// cyclic shift, together with the regularized mass matrix L + alpha*I.
///
/// Every operation acts on an N x d row-major block (bead index = row), i.e.
/// on d independent length-N columns. Circulant structure means the DFT
/// diagonalizes L; all spectral operations run in O(d N log N).
///
/// The object is immutable after construction and may be shared across
/// threads. FFT plans are cached per column count behind a mutex.
class RingOperator {
public:
    RingOperator(std::size_t n_beads, double mass, double beta, double alpha);
    ~RingOperator();
    RingOperator(const RingOperator&) = delete;
    RingOperator& operator=(const RingOperator&) = delete;

    std::size_t n_beads() const { return n_beads_; }
    double mass() const { return mass_; }
    double beta_n() const { return beta_n_; }
    double alpha() const { return alpha_; }
    /// Spring constant m / beta_N^2 (the off-diagonal magnitude of L).
    double spring() const { return spring_; }

    /// Eigenvalues of L in the orthogonal-basis order: constant mode (0),
    /// then cos/sin pairs for k = 1..N/2-1, then the alternating mode 4m/beta_N^2.
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    /// Eigenvalue of L for DFT frequency k (0 <= k <= N/2).
    double frequency_eigenvalue(std::size_t k) const;

    /// lambda_max / lambda_min over the nonzero spectrum: 1 / sin^2(pi/N).
    double stiffness_condition() const;
    /// Square root of the above, the ratio of extreme nonzero mode frequencies.
    double frequency_condition() const;

    /// out = (L + alpha I) x.
    void apply(std::span<const double> x, std::span<double> out, std::size_t n_cols) const;
    /// out = (L + alpha I)^{-1} b via the spectrum.
    void solve(std::span<const double> b, std::span<double> out, std::size_t n_cols) const;
    /// out = (L + alpha I)^{-1} b via a cyclic tridiagonal (Sherman-Morrison) solve.
    void solve_tridiagonal(std::span<const double> b, std::span<double> out,
                           std::size_t n_cols) const;
    /// out = (L + alpha I)^{-1/2} x via the spectrum.
    void sqrt_inverse_apply(std::span<const double> x, std::span<double> out,
                            std::size_t n_cols) const;
    /// Fills out with d columns, each an independent N(0, (L + alpha I)^{-1}) draw.
    void sample_gaussian(Rng& rng, std::span<double> out, std::size_t n_cols) const;

    /// Coefficients in the orthogonal eigenbasis D: out = D^T x.
    void to_modes(std::span<const double> x, std::span<double> out, std::size_t n_cols) const;
    /// Inverse of to_modes: out = D y.
    void from_modes(std::span<const double> y, std::span<double> out, std::size_t n_cols) const;

private:
    struct Plans;
    const Plans& plans_for(std::size_t n_cols) const;
    /// x -> IDFT(filter_k * DFT(x)), filter indexed by DFT frequency 0..N/2.
    void circulant_filter(std::span<const double> x, std::span<double> out, std::size_t n_cols,
                          const std::vector<double>& filter) const;
    void require_regularized(const char* what) const;
    void check_shape(std::size_t in, std::size_t out, std::size_t n_cols) const;

    std::size_t n_beads_;
    double mass_;
    double beta_n_;
    double alpha_;
    double spring_;
    std::vector<double> eigenvalues_;
    std::vector<double> inverse_filter_;
    std::vector<double> inverse_sqrt_filter_;
    // Cyclic tridiagonal factorization (Thomas sweep on the perturbed system).
    std::vector<double> tri_cprime_;
    std::vector<double> tri_denom_;
    std::vector<double> tri_correction_;
    double tri_gamma_ = 0.0;

    mutable std::mutex plan_mutex_;
    mutable std::map<std::size_t, std::unique_ptr<Plans>> plans_;
};

}  // namespace rbpimd
