#include "rbpimd/rbpimd.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "rbpimd/experiments.hpp"

struct rbp_config {
    rbpimd::ExperimentConfig cfg;
};

struct rbp_ring {
    std::unique_ptr<rbpimd::RingOperator> op;
};

struct rbp_sampler {
    rbpimd::ExperimentConfig cfg;
    std::unique_ptr<rbpimd::Sampler> sampler;
};

namespace {

thread_local std::string g_last_error;

rbp_status fail(rbp_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <class F>
rbp_status guarded(F&& body) {
    try {
        g_last_error.clear();
        body();
        return RBP_OK;
    } catch (const rbpimd::ConfigError& e) {
        return fail(RBP_CONFIG, e.what());
    } catch (const rbpimd::SingularityError& e) {
        return fail(RBP_SINGULARITY, e.what());
    } catch (const rbpimd::IoError& e) {
        return fail(RBP_IO, e.what());
    } catch (const rbpimd::InvalidArgument& e) {
        return fail(RBP_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(RBP_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(RBP_INTERNAL, e.what());
    } catch (...) {
        return fail(RBP_INTERNAL, "unknown error");
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw rbpimd::InvalidArgument(what);
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::size_t ring_block(const rbp_ring* ring, std::size_t n_cols) {
    return ring->op->n_beads() * n_cols;
}

}  // namespace

extern "C" {

const char* rbp_last_error(void) { return g_last_error.c_str(); }

const char* rbp_version(void) { return "1.0.0"; }

void rbp_string_free(char* s) { std::free(s); }

rbp_status rbp_config_create(rbp_config** out) {
    return guarded([&] {
        require(out != nullptr, "out is null");
        *out = new rbp_config();
    });
}

void rbp_config_destroy(rbp_config* cfg) { delete cfg; }

rbp_status rbp_config_load_preset(rbp_config* cfg, const char* name) {
    return guarded([&] {
        require(cfg && name, "null argument");
        cfg->cfg.apply_file(rbpimd::find_preset(name));
        cfg->cfg.preset = name;
    });
}

rbp_status rbp_config_load_file(rbp_config* cfg, const char* path) {
    return guarded([&] {
        require(cfg && path, "null argument");
        cfg->cfg.apply_file(path);
    });
}

rbp_status rbp_config_set(rbp_config* cfg, const char* key, const char* value) {
    return guarded([&] {
        require(cfg && key && value, "null argument");
        cfg->cfg.set(key, value);
    });
}

rbp_status rbp_config_get(const rbp_config* cfg, const char* key, char** value) {
    return guarded([&] {
        require(cfg && key && value, "null argument");
        for (const auto& [k, v] : cfg->cfg.entries())
            if (k == key) {
                *value = dup_string(v);
                return;
            }
        throw rbpimd::ConfigError(std::string(key) + ": unknown key");
    });
}

rbp_status rbp_config_validate(rbp_config* cfg) {
    return guarded([&] {
        require(cfg != nullptr, "cfg is null");
        cfg->cfg.finalize();
        cfg->cfg.validate();
    });
}

rbp_status rbp_config_dump(const rbp_config* cfg, char** text) {
    return guarded([&] {
        require(cfg && text, "null argument");
        std::ostringstream out;
        for (const auto& [k, v] : cfg->cfg.entries()) out << k << " = " << v << '\n';
        *text = dup_string(out.str());
    });
}

rbp_status rbp_preset_list(char** names) {
    return guarded([&] {
        require(names != nullptr, "names is null");
        std::string joined;
        for (const auto& n : rbpimd::list_presets()) joined += n + '\n';
        *names = dup_string(joined);
    });
}

rbp_status rbp_run_experiment(rbp_config* cfg, const char* command, const char* out_dir,
                              unsigned threads, char** summary_json) {
    return guarded([&] {
        require(cfg && command && out_dir, "null argument");
        cfg->cfg.finalize();
        cfg->cfg.validate();
        const std::string summary =
            rbpimd::run_command(cfg->cfg, command, out_dir, threads == 0 ? 1 : threads);
        if (summary_json) *summary_json = dup_string(summary);
    });
}

rbp_status rbp_ring_create(size_t n_beads, double mass, double beta, double alpha, rbp_ring** out) {
    return guarded([&] {
        require(out != nullptr, "out is null");
        auto r = std::make_unique<rbp_ring>();
        r->op = std::make_unique<rbpimd::RingOperator>(n_beads, mass, beta, alpha);
        *out = r.release();
    });
}

void rbp_ring_destroy(rbp_ring* ring) { delete ring; }

rbp_status rbp_ring_eigenvalues(const rbp_ring* ring, double* out, size_t n) {
    return guarded([&] {
        require(ring && out, "null argument");
        const auto& ev = ring->op->eigenvalues();
        require(n == ev.size(), "eigenvalue buffer length must equal n_beads");
        std::copy(ev.begin(), ev.end(), out);
    });
}

#define RBP_RING_OP(name, method)                                                            \
    rbp_status name(const rbp_ring* ring, const double* x, double* out, size_t n_cols) {    \
        return guarded([&] {                                                                 \
            require(ring && x && out, "null argument");                                      \
            const std::size_t len = ring_block(ring, n_cols);                                \
            ring->op->method(std::span<const double>(x, len), std::span<double>(out, len),   \
                             n_cols);                                                        \
        });                                                                                  \
    }

RBP_RING_OP(rbp_ring_apply, apply)
RBP_RING_OP(rbp_ring_solve, solve)
RBP_RING_OP(rbp_ring_solve_tridiagonal, solve_tridiagonal)
RBP_RING_OP(rbp_ring_sqrt_inverse_apply, sqrt_inverse_apply)

#undef RBP_RING_OP

rbp_status rbp_ring_sample(const rbp_ring* ring, uint64_t seed, double* out, size_t n_cols) {
    return guarded([&] {
        require(ring && out, "null argument");
        rbpimd::Rng rng = rbpimd::make_rng(seed, 0, rbpimd::Stream::Noise);
        ring->op->sample_gaussian(rng, std::span<double>(out, ring_block(ring, n_cols)), n_cols);
    });
}

rbp_status rbp_sampler_create(rbp_config* cfg, uint64_t trajectory_id, rbp_sampler** out) {
    return guarded([&] {
        require(cfg && out, "null argument");
        cfg->cfg.finalize();
        cfg->cfg.validate();
        auto s = std::make_unique<rbp_sampler>();
        s->cfg = cfg->cfg;
        s->sampler = std::make_unique<rbpimd::Sampler>(s->cfg.system, s->cfg.method,
                                                       trajectory_id, s->cfg.dynamics);
        *out = s.release();
    });
}

void rbp_sampler_destroy(rbp_sampler* s) { delete s; }

rbp_status rbp_sampler_step(rbp_sampler* s, size_t n_steps) {
    return guarded([&] {
        require(s != nullptr, "sampler is null");
        for (size_t i = 0; i < n_steps; ++i) s->sampler->step();
    });
}

rbp_status rbp_sampler_shape(const rbp_sampler* s, size_t* n_beads, size_t* n_particles) {
    return guarded([&] {
        require(s && n_beads && n_particles, "null argument");
        *n_beads = s->cfg.system.n_beads;
        *n_particles = s->cfg.system.n_particles;
    });
}

namespace {

void copy_grid(const rbpimd::BeadGrid& g, double* out, size_t len) {
    require(out != nullptr, "out is null");
    require(len == g.size(), "buffer length must equal n_beads * n_particles * 3");
    std::copy(g.flat().begin(), g.flat().end(), out);
}

}  // namespace

rbp_status rbp_sampler_positions(const rbp_sampler* s, double* out, size_t len) {
    return guarded([&] {
        require(s != nullptr, "sampler is null");
        copy_grid(s->sampler->state().q, out, len);
    });
}

rbp_status rbp_sampler_velocities(const rbp_sampler* s, double* out, size_t len) {
    return guarded([&] {
        require(s != nullptr, "sampler is null");
        copy_grid(s->sampler->state().v, out, len);
    });
}

rbp_status rbp_sampler_set_state(rbp_sampler* s, const double* q, const double* v, size_t len) {
    return guarded([&] {
        require(s && q && v, "null argument");
        rbpimd::PhaseState st{rbpimd::BeadGrid(s->cfg.system.n_beads, s->cfg.system.n_particles),
                              rbpimd::BeadGrid(s->cfg.system.n_beads, s->cfg.system.n_particles)};
        require(len == st.q.size(), "buffer length must equal n_beads * n_particles * 3");
        std::copy(q, q + len, st.q.flat().begin());
        std::copy(v, v + len, st.v.flat().begin());
        s->sampler->set_state(std::move(st));
    });
}

rbp_status rbp_sampler_weight(rbp_sampler* s, double* out) {
    return guarded([&] {
        require(s && out, "null argument");
        *out = rbpimd::evaluate_weight(s->cfg.system, s->cfg.observable, s->sampler->state().q,
                                       s->cfg.rbm_weight, s->sampler->weight_rng());
    });
}

rbp_status rbp_sampler_stats_get(const rbp_sampler* s, rbp_sampler_stats* out) {
    return guarded([&] {
        require(s && out, "null argument");
        out->time = s->sampler->time();
        out->steps = s->sampler->steps_taken();
        out->metropolis_tests = s->sampler->metropolis_tests();
        out->rejections = s->sampler->rejections();
        out->pair_evals = s->sampler->pair_evals();
    });
}

rbp_status rbp_sampler_save_snapshot(const rbp_sampler* s, const char* path) {
    return guarded([&] {
        require(s && path, "null argument");
        rbpimd::save_snapshot(path, s->sampler->state().q, &s->sampler->state().v);
    });
}

rbp_status rbp_sampler_load_snapshot(rbp_sampler* s, const char* path) {
    return guarded([&] {
        require(s && path, "null argument");
        rbpimd::PhaseState st;
        rbpimd::load_snapshot(path, st.q, st.v);
        require(st.q.n_beads() == s->cfg.system.n_beads &&
                    st.q.n_particles() == s->cfg.system.n_particles,
                "snapshot shape does not match the sampler");
        require(st.v.size() != 0, "snapshot carries no velocities");
        s->sampler->set_state(std::move(st));
    });
}

}  // extern "C"
