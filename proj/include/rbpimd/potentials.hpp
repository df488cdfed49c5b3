#pragma once

#include <string>
#include <vector>

#include "rbpimd/types.hpp"

namespace rbpimd {

/// Radii below this are treated as coincident points.
inline constexpr double kSingularRadius = 1e-12;

enum class PairKind {
    Coulomb,          ///< kappa / r
    MixedCLJ,         ///< SmoothPartCLJ + SingularPartCLJ
    SmoothPartCLJ,    ///< 2 - r/sigma below sigma, sigma/r above
    SingularPartCLJ,  ///< ((sigma/r)^12 - (sigma/r)^6)/6 + 1 below sigma, 0 above
};

/// Radially symmetric pair interaction V(q) = phi(|q|). Immutable value type.
class PairPotential {
public:
    static PairPotential coulomb(double kappa = 1.0);
    static PairPotential mixed(double sigma = 0.3);
    static PairPotential smooth_part(double sigma = 0.3);
    static PairPotential singular_part(double sigma = 0.3);

    PairKind kind() const { return kind_; }
    double kappa() const { return kappa_; }
    double sigma() const { return sigma_; }
    /// True for the mixed Coulomb/Lennard-Jones family (splitting applies).
    bool is_mixed_family() const { return kind_ != PairKind::Coulomb; }
    /// The smooth component used to drive split dynamics. Coulomb has no split.
    PairPotential smooth() const;
    /// Same potential with its strength multiplied by `factor` (kappa for Coulomb).
    PairPotential scaled(double factor) const;

    /// phi(r); throws SingularityError for r < kSingularRadius.
    double value_at(double r) const;
    /// phi'(r); throws SingularityError for r < kSingularRadius.
    double derivative_at(double r) const;

    double value(const Vec3& q) const { return value_at(norm(q)); }
    /// phi'(|q|) q / |q|.
    Vec3 gradient(const Vec3& q) const;

    std::string name() const;

private:
    PairPotential(PairKind kind, double kappa, double sigma, double scale)
        : kind_(kind), kappa_(kappa), sigma_(sigma), scale_(scale) {}
    double raw_value(double r) const;
    double raw_derivative(double r) const;

    PairKind kind_;
    double kappa_;
    double sigma_;
    double scale_;
};

/// Harmonic confinement V(q) = (alpha0/2)|q|^2.
class ExternalPotential {
public:
    explicit ExternalPotential(double alpha0) : alpha0_(alpha0) {}
    /// alpha0 = P^{-2/3}: keeps pairwise distances O(1) for P confined particles.
    static ExternalPotential for_particles(std::size_t n_particles);

    double alpha0() const { return alpha0_; }
    double value(const Vec3& q) const { return 0.5 * alpha0_ * norm2(q); }
    Vec3 gradient(const Vec3& q) const { return q * alpha0_; }

private:
    double alpha0_;
};

/// The mixed Coulomb/Lennard-Jones form as a single piecewise display
/// (LJ/6 + 1 below sigma, sigma/r above). Differs from SmoothPart + SingularPart
/// by 2 - r/sigma inside the core; kept only for documentation checks.
double displayed_mixed_value(double sigma, double r);

struct SplitConsistencyRow {
    double r;
    double split_sum;   ///< SmoothPartCLJ + SingularPartCLJ
    double displayed;   ///< displayed_mixed_value
    double difference;  ///< split_sum - displayed
};

/// Tabulates the split sum against the single-display form on the given radii.
std::vector<SplitConsistencyRow> split_consistency_check(double sigma,
                                                         const std::vector<double>& radii);

}  // namespace rbpimd
