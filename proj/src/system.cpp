#include "rbpimd/system.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace rbpimd {

std::size_t SystemSpec::steps() const {
    return static_cast<std::size_t>(std::llround(total_time / dt));
}

double default_alpha(std::size_t n_particles) {
    return std::pow(static_cast<double>(n_particles), -2.0 / 3.0);
}

void SystemSpec::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("system." + field + ": " + why);
    };
    if (!(mass > 0.0)) fail("mass", "must be positive");
    if (!(beta > 0.0)) fail("beta", "must be positive");
    if (n_beads < 4 || n_beads % 2 != 0) fail("n_beads", "must be even and >= 4");
    if (n_particles < 1) fail("n_particles", "must be >= 1");
    if (!(alpha > 0.0)) fail("alpha", "must be positive");
    if (!(gamma >= 0.0)) fail("gamma", "must be non-negative");
    if (!(dt > 0.0)) fail("dt", "must be positive");
    if (!(total_time >= 0.0)) fail("total_time", "must be non-negative");
    if (n_particles >= 2) {
        if (batch_size < 2 || batch_size > n_particles)
            fail("batch_size", "must satisfy 2 <= p <= P");
        if (n_particles % batch_size != 0) fail("batch_size", "must divide n_particles");
    }
}

namespace {

[[noreturn]] void throw_coincident(std::size_t bead, std::size_t i, std::size_t j) {
    std::ostringstream msg;
    msg << "coincident particles " << i << " and " << j << " on bead " << bead;
    throw SingularityError(msg.str());
}

}  // namespace

void full_interaction_force(const PairPotential& potential, const BeadGrid& q, ForceField& out,
                            PairCounter* counter) {
    const std::size_t n = q.n_beads();
    const std::size_t p = q.n_particles();
    if (!out.same_shape(q)) out = ForceField(n, p);
    out.fill(0.0);
    auto flat = q.flat();
    auto f = out.flat();
    for (std::size_t k = 0; k < n; ++k) {
        const double* row = &flat[k * 3 * p];
        double* frow = &f[k * 3 * p];
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                const double dx = row[3 * i] - row[3 * j];
                const double dy = row[3 * i + 1] - row[3 * j + 1];
                const double dz = row[3 * i + 2] - row[3 * j + 2];
                const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (r < kSingularRadius) throw_coincident(k, i, j);
                const double s = potential.derivative_at(r) / r;
                frow[3 * i] += s * dx;
                frow[3 * i + 1] += s * dy;
                frow[3 * i + 2] += s * dz;
                frow[3 * j] -= s * dx;
                frow[3 * j + 1] -= s * dy;
                frow[3 * j + 2] -= s * dz;
            }
        }
    }
    if (counter) counter->evaluations += n * p * (p - 1) / 2;
}

ForceField full_interaction_force(const PairPotential& potential, const BeadGrid& q,
                                  PairCounter* counter) {
    ForceField out(q.n_beads(), q.n_particles());
    full_interaction_force(potential, q, out, counter);
    return out;
}

double u_alpha(const PairPotential& potential, const BeadGrid& q) {
    double total = 0.0;
    for (std::size_t k = 0; k < q.n_beads(); ++k) {
        for (std::size_t i = 0; i < q.n_particles(); ++i) {
            const Vec3 qi = q.at(k, i);
            for (std::size_t j = i + 1; j < q.n_particles(); ++j) {
                const double r = norm(qi - q.at(k, j));
                if (r < kSingularRadius) throw_coincident(k, i, j);
                total += potential.value_at(r);
            }
        }
    }
    return total;
}

double u2_cutoff(const PairPotential& potential, const BeadGrid& q) {
    if (!potential.is_mixed_family())
        throw InvalidArgument("u2_cutoff requires the mixed Coulomb/Lennard-Jones family");
    const auto singular = PairPotential::singular_part(potential.sigma());
    const double cutoff2 = potential.sigma() * potential.sigma();
    double total = 0.0;
    for (std::size_t k = 0; k < q.n_beads(); ++k) {
        for (std::size_t i = 0; i < q.n_particles(); ++i) {
            const Vec3 qi = q.at(k, i);
            for (std::size_t j = i + 1; j < q.n_particles(); ++j) {
                const double r2 = norm2(qi - q.at(k, j));
                if (r2 >= cutoff2) continue;
                const double r = std::sqrt(r2);
                if (r < kSingularRadius) return std::numeric_limits<double>::infinity();
                total += singular.value_at(r);
            }
        }
    }
    return total;
}

double min_pair_distance(const BeadGrid& q) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < q.n_beads(); ++k)
        for (std::size_t i = 0; i < q.n_particles(); ++i)
            for (std::size_t j = i + 1; j < q.n_particles(); ++j)
                best = std::min(best, norm(q.at(k, i) - q.at(k, j)));
    return best;
}

double init_min_pair_distance(const SystemSpec& spec) {
    // Starting inside the Lennard-Jones core gives enormous forces; stay outside it.
    return spec.potential.is_mixed_family() ? spec.potential.sigma() : 1e-6;
}

PhaseState init_state(const SystemSpec& spec, const RingOperator& ring, Rng& rng) {
    const std::size_t n = spec.n_beads;
    const std::size_t p = spec.n_particles;
    const double spread = std::cbrt(static_cast<double>(p));
    const double jitter = 1e-2;
    const double min_dist = init_min_pair_distance(spec);

    PhaseState state{BeadGrid(n, p), BeadGrid(n, p)};
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int attempt = 0;; ++attempt) {
        if (attempt > 10000)
            throw Error("init_state: could not place particles without overlaps");
        for (std::size_t i = 0; i < p; ++i) {
            const Vec3 centre{spread * gauss(rng), spread * gauss(rng), spread * gauss(rng)};
            for (std::size_t k = 0; k < n; ++k)
                state.q.set(k, i,
                            centre + Vec3{jitter * gauss(rng), jitter * gauss(rng),
                                          jitter * gauss(rng)});
        }
        if (min_pair_distance(state.q) >= min_dist) break;
    }

    ring.sample_gaussian(rng, state.v.flat(), state.v.n_cols());
    const double scale = 1.0 / std::sqrt(spec.beta_n());
    for (double& x : state.v.flat()) x *= scale;
    return state;
}

namespace {

constexpr char kSnapshotMagic[8] = {'R', 'B', 'P', 'I', 'M', 'D', 'Q', '1'};

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace

void save_snapshot(const std::filesystem::path& path, const BeadGrid& q, const BeadGrid* v) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open snapshot for writing: " + path.string());
    out.write(kSnapshotMagic, sizeof kSnapshotMagic);
    write_u32(out, static_cast<std::uint32_t>(q.n_beads()));
    write_u32(out, static_cast<std::uint32_t>(q.n_particles()));
    write_u32(out, v ? 1u : 0u);
    write_u32(out, 0u);
    out.write(reinterpret_cast<const char*>(q.flat().data()),
              static_cast<std::streamsize>(q.size() * sizeof(double)));
    if (v) {
        if (!v->same_shape(q)) throw InvalidArgument("snapshot: q and v shapes differ");
        out.write(reinterpret_cast<const char*>(v->flat().data()),
                  static_cast<std::streamsize>(v->size() * sizeof(double)));
    }
    if (!out) throw IoError("failed writing snapshot: " + path.string());
}

void load_snapshot(const std::filesystem::path& path, BeadGrid& q, BeadGrid& v) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot: " + path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0)
        throw IoError("not an rbpimd snapshot: " + path.string());
    const std::uint32_t n = read_u32(in);
    const std::uint32_t p = read_u32(in);
    const std::uint32_t has_v = read_u32(in);
    read_u32(in);
    q = BeadGrid(n, p);
    in.read(reinterpret_cast<char*>(q.flat().data()),
            static_cast<std::streamsize>(q.size() * sizeof(double)));
    if (has_v) {
        v = BeadGrid(n, p);
        in.read(reinterpret_cast<char*>(v.flat().data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        v = BeadGrid();
    }
    if (!in) throw IoError("truncated snapshot: " + path.string());
}

void save_snapshot_csv(const std::filesystem::path& path, const BeadGrid& q) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open snapshot for writing: " + path.string());
    out << "# rbpimd snapshot N=" << q.n_beads() << " P=" << q.n_particles() << "\n";
    out << "bead,particle,x,y,z\n";
    out << std::setprecision(17);
    for (std::size_t k = 0; k < q.n_beads(); ++k)
        for (std::size_t i = 0; i < q.n_particles(); ++i) {
            const Vec3 x = q.at(k, i);
            out << k << ',' << i << ',' << x.x << ',' << x.y << ',' << x.z << '\n';
        }
}

}  // namespace rbpimd
