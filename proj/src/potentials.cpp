#include "rbpimd/potentials.hpp"

#include <cmath>
#include <sstream>

namespace rbpimd {

namespace {

double sixth_power(double sigma, double r) {
    const double s = sigma / r;
    const double s2 = s * s;
    return s2 * s2 * s2;
}

double lennard_jones_core(double sigma, double r) {
    const double s6 = sixth_power(sigma, r);
    return (s6 * s6 - s6) / 6.0 + 1.0;
}

double lennard_jones_core_derivative(double sigma, double r) {
    const double s6 = sixth_power(sigma, r);
    return (-12.0 * s6 * s6 + 6.0 * s6) / (6.0 * r);
}

void check_radius(double r) {
    if (!(r >= kSingularRadius)) {
        std::ostringstream msg;
        msg << "pair potential evaluated at coincident points (r = " << r << ")";
        throw SingularityError(msg.str());
    }
}

}  // namespace

PairPotential PairPotential::coulomb(double kappa) {
    if (!(kappa > 0.0)) throw InvalidArgument("coulomb: kappa must be positive");
    return {PairKind::Coulomb, kappa, 0.0, 1.0};
}

PairPotential PairPotential::mixed(double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("mixed potential: sigma must be positive");
    return {PairKind::MixedCLJ, 0.0, sigma, 1.0};
}

PairPotential PairPotential::smooth_part(double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("smooth part: sigma must be positive");
    return {PairKind::SmoothPartCLJ, 0.0, sigma, 1.0};
}

PairPotential PairPotential::singular_part(double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("singular part: sigma must be positive");
    return {PairKind::SingularPartCLJ, 0.0, sigma, 1.0};
}

PairPotential PairPotential::smooth() const {
    if (kind_ == PairKind::Coulomb || kind_ == PairKind::SmoothPartCLJ) return *this;
    return {PairKind::SmoothPartCLJ, kappa_, sigma_, scale_};
}

PairPotential PairPotential::scaled(double factor) const {
    return {kind_, kappa_, sigma_, scale_ * factor};
}

double PairPotential::raw_value(double r) const {
    switch (kind_) {
    case PairKind::Coulomb:
        return kappa_ / r;
    case PairKind::SmoothPartCLJ:
        return r < sigma_ ? 2.0 - r / sigma_ : sigma_ / r;
    case PairKind::SingularPartCLJ:
        return r < sigma_ ? lennard_jones_core(sigma_, r) : 0.0;
    case PairKind::MixedCLJ:
        return r < sigma_ ? 2.0 - r / sigma_ + lennard_jones_core(sigma_, r) : sigma_ / r;
    }
    return 0.0;
}

double PairPotential::raw_derivative(double r) const {
    switch (kind_) {
    case PairKind::Coulomb:
        return -kappa_ / (r * r);
    case PairKind::SmoothPartCLJ:
        return r < sigma_ ? -1.0 / sigma_ : -sigma_ / (r * r);
    case PairKind::SingularPartCLJ:
        return r < sigma_ ? lennard_jones_core_derivative(sigma_, r) : 0.0;
    case PairKind::MixedCLJ:
        return r < sigma_ ? -1.0 / sigma_ + lennard_jones_core_derivative(sigma_, r)
                          : -sigma_ / (r * r);
    }
    return 0.0;
}

double PairPotential::value_at(double r) const {
    check_radius(r);
    return scale_ * raw_value(r);
}

double PairPotential::derivative_at(double r) const {
    check_radius(r);
    return scale_ * raw_derivative(r);
}

Vec3 PairPotential::gradient(const Vec3& q) const {
    const double r = norm(q);
    return q * (derivative_at(r) / r);
}

std::string PairPotential::name() const {
    std::ostringstream out;
    switch (kind_) {
    case PairKind::Coulomb: out << "coulomb(kappa=" << kappa_ << ")"; break;
    case PairKind::MixedCLJ: out << "mixed(sigma=" << sigma_ << ")"; break;
    case PairKind::SmoothPartCLJ: out << "smooth_part(sigma=" << sigma_ << ")"; break;
    case PairKind::SingularPartCLJ: out << "singular_part(sigma=" << sigma_ << ")"; break;
    }
    return out.str();
}

ExternalPotential ExternalPotential::for_particles(std::size_t n_particles) {
    if (n_particles == 0) throw InvalidArgument("external potential: need at least one particle");
    return ExternalPotential(std::pow(static_cast<double>(n_particles), -2.0 / 3.0));
}

double displayed_mixed_value(double sigma, double r) {
    check_radius(r);
    return r < sigma ? lennard_jones_core(sigma, r) : sigma / r;
}

std::vector<SplitConsistencyRow> split_consistency_check(double sigma,
                                                         const std::vector<double>& radii) {
    const auto smooth = PairPotential::smooth_part(sigma);
    const auto singular = PairPotential::singular_part(sigma);
    std::vector<SplitConsistencyRow> rows;
    rows.reserve(radii.size());
    for (double r : radii) {
        const double sum = smooth.value_at(r) + singular.value_at(r);
        const double shown = displayed_mixed_value(sigma, r);
        rows.push_back({r, sum, shown, sum - shown});
    }
    return rows;
}

}  // namespace rbpimd
