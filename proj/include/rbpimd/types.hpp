#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rbpimd {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
    friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend Vec3 operator-(Vec3 a) { return a *= -1.0; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

/// Base class for all library errors. The C API maps subclasses to status codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Raised when a pair potential is evaluated at (numerically) coincident points.
class SingularityError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// N x P grid of 3-vectors stored bead-major: all particles of bead k are
/// contiguous, so the flat array is an N x 3P row-major matrix whose columns
/// are the per-particle, per-coordinate ring-polymer paths.
class BeadGrid {
public:
    BeadGrid() = default;
    BeadGrid(std::size_t n_beads, std::size_t n_particles)
        : n_beads_(n_beads), n_particles_(n_particles), data_(n_beads * n_particles * 3, 0.0) {}

    std::size_t n_beads() const { return n_beads_; }
    std::size_t n_particles() const { return n_particles_; }
    /// Number of scalar columns (3P).
    std::size_t n_cols() const { return 3 * n_particles_; }
    std::size_t size() const { return data_.size(); }

    Vec3 at(std::size_t bead, std::size_t particle) const {
        const double* p = &data_[index(bead, particle)];
        return {p[0], p[1], p[2]};
    }
    void set(std::size_t bead, std::size_t particle, const Vec3& v) {
        double* p = &data_[index(bead, particle)];
        p[0] = v.x; p[1] = v.y; p[2] = v.z;
    }
    void add(std::size_t bead, std::size_t particle, const Vec3& v) {
        double* p = &data_[index(bead, particle)];
        p[0] += v.x; p[1] += v.y; p[2] += v.z;
    }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }
    std::span<const double> bead(std::size_t k) const {
        return std::span<const double>(data_).subspan(k * n_cols(), n_cols());
    }

    void fill(double value) { std::fill(data_.begin(), data_.end(), value); }
    bool same_shape(const BeadGrid& o) const {
        return n_beads_ == o.n_beads_ && n_particles_ == o.n_particles_;
    }

    friend bool operator==(const BeadGrid&, const BeadGrid&) = default;

private:
    std::size_t index(std::size_t bead, std::size_t particle) const {
        return (bead * n_particles_ + particle) * 3;
    }

    std::size_t n_beads_ = 0;
    std::size_t n_particles_ = 0;
    std::vector<double> data_;
};

/// Holds the interaction-gradient field sum_{j != i} grad V(q_k^i - q_k^j)
/// per bead and particle. It enters the velocity drift with a minus sign.
using ForceField = BeadGrid;

struct PhaseState {
    BeadGrid q;
    BeadGrid v;
};

}  // namespace rbpimd
