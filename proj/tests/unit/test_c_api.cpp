#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "rbpimd/rbpimd.h"

TEST_CASE("config handle") {
    rbp_config* cfg = nullptr;
    REQUIRE(rbp_config_create(&cfg) == RBP_OK);
    CHECK(rbp_config_load_preset(cfg, "smoke") == RBP_OK);
    CHECK(rbp_config_set(cfg, "system.seed", "5") == RBP_OK);
    char* value = nullptr;
    REQUIRE(rbp_config_get(cfg, "system.seed", &value) == RBP_OK);
    CHECK(std::string(value) == "5");
    rbp_string_free(value);

    CHECK(rbp_config_set(cfg, "system.nonsense", "1") == RBP_CONFIG);
    CHECK(std::string(rbp_last_error()).find("system.nonsense") != std::string::npos);
    CHECK(rbp_config_get(cfg, "nope", &value) == RBP_CONFIG);
    CHECK(rbp_config_load_preset(cfg, "missing-preset") == RBP_CONFIG);
    CHECK(rbp_config_load_file(cfg, "/nonexistent/file.cfg") == RBP_CONFIG);
    CHECK(rbp_config_set(nullptr, "a", "b") == RBP_INVALID_ARGUMENT);

    CHECK(rbp_config_validate(cfg) == RBP_OK);
    CHECK(std::string(rbp_last_error()).empty());
    char* dump = nullptr;
    REQUIRE(rbp_config_dump(cfg, &dump) == RBP_OK);
    CHECK(std::string(dump).find("system.n_beads = 4\n") != std::string::npos);
    rbp_string_free(dump);
    rbp_config_destroy(cfg);

    char* names = nullptr;
    REQUIRE(rbp_preset_list(&names) == RBP_OK);
    CHECK(std::string(names).find("smoke\n") != std::string::npos);
    rbp_string_free(names);
    CHECK(std::strlen(rbp_version()) > 0);
}

TEST_CASE("ring handle") {
    rbp_ring* ring = nullptr;
    CHECK(rbp_ring_create(5, 1.0, 1.0, 0.1, &ring) == RBP_INVALID_ARGUMENT);
    REQUIRE(rbp_ring_create(8, 1.0, 4.0, 0.25, &ring) == RBP_OK);
    std::vector<double> ev(8);
    REQUIRE(rbp_ring_eigenvalues(ring, ev.data(), ev.size()) == RBP_OK);
    CHECK(ev[0] == 0.0);
    CHECK(rbp_ring_eigenvalues(ring, ev.data(), 3) == RBP_INVALID_ARGUMENT);

    std::vector<double> b(16), x(16), back(16), t(16);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::sin(static_cast<double>(i));
    REQUIRE(rbp_ring_solve(ring, b.data(), x.data(), 2) == RBP_OK);
    REQUIRE(rbp_ring_apply(ring, x.data(), back.data(), 2) == RBP_OK);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(back[i] == doctest::Approx(b[i]));
    REQUIRE(rbp_ring_solve_tridiagonal(ring, b.data(), t.data(), 2) == RBP_OK);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(t[i] == doctest::Approx(x[i]));
    CHECK(rbp_ring_sqrt_inverse_apply(ring, b.data(), t.data(), 2) == RBP_OK);
    CHECK(rbp_ring_sample(ring, 3, t.data(), 2) == RBP_OK);
    rbp_ring_destroy(ring);

    REQUIRE(rbp_ring_create(8, 1.0, 4.0, 0.0, &ring) == RBP_OK);
    CHECK(rbp_ring_solve(ring, b.data(), x.data(), 2) == RBP_INVALID_ARGUMENT);
    rbp_ring_destroy(ring);
}

TEST_CASE("sampler handle") {
    rbp_config* cfg = nullptr;
    REQUIRE(rbp_config_create(&cfg) == RBP_OK);
    REQUIRE(rbp_config_load_preset(cfg, "smoke-mixed") == RBP_OK);
    rbp_sampler* s = nullptr;
    REQUIRE(rbp_sampler_create(cfg, 0, &s) == RBP_OK);
    std::size_t n = 0, p = 0;
    REQUIRE(rbp_sampler_shape(s, &n, &p) == RBP_OK);
    CHECK(n == 4);
    CHECK(p == 4);
    std::vector<double> q(n * p * 3), v(q.size());
    CHECK(rbp_sampler_step(s, 10) == RBP_OK);
    rbp_sampler_stats st{};
    REQUIRE(rbp_sampler_stats_get(s, &st) == RBP_OK);
    CHECK(st.steps == 10);
    CHECK(st.metropolis_tests == 10);
    CHECK(st.time == doctest::Approx(10.0 / 16));
    REQUIRE(rbp_sampler_positions(s, q.data(), q.size()) == RBP_OK);
    REQUIRE(rbp_sampler_velocities(s, v.data(), v.size()) == RBP_OK);
    CHECK(rbp_sampler_positions(s, q.data(), 5) == RBP_INVALID_ARGUMENT);
    double w = 0.0;
    CHECK(rbp_sampler_weight(s, &w) == RBP_OK);
    CHECK(w > 0.0);

    const auto path = (std::filesystem::temp_directory_path() / "rbpimd_capi.rbpq").string();
    REQUIRE(rbp_sampler_save_snapshot(s, path.c_str()) == RBP_OK);
    rbp_sampler* t = nullptr;
    REQUIRE(rbp_sampler_create(cfg, 9, &t) == RBP_OK);
    REQUIRE(rbp_sampler_load_snapshot(t, path.c_str()) == RBP_OK);
    std::vector<double> q2(q.size());
    REQUIRE(rbp_sampler_positions(t, q2.data(), q2.size()) == RBP_OK);
    CHECK(q2 == q);
    CHECK(rbp_sampler_load_snapshot(t, "/nonexistent.rbpq") == RBP_IO);

    // Coincident particles make the exact force singular.
    rbp_config* coul = nullptr;
    REQUIRE(rbp_config_create(&coul) == RBP_OK);
    REQUIRE(rbp_config_load_preset(coul, "smoke") == RBP_OK);
    REQUIRE(rbp_config_set(coul, "method", "pmmLang") == RBP_OK);
    rbp_sampler* u = nullptr;
    REQUIRE(rbp_sampler_create(coul, 0, &u) == RBP_OK);
    std::vector<double> zero(q.size(), 0.0);
    CHECK(rbp_sampler_set_state(u, zero.data(), zero.data(), zero.size()) == RBP_SINGULARITY);

    rbp_sampler_destroy(u);
    rbp_sampler_destroy(t);
    rbp_sampler_destroy(s);
    rbp_config_destroy(coul);
    rbp_config_destroy(cfg);
    std::filesystem::remove(path);
}

TEST_CASE("run experiment through the C API") {
    rbp_config* cfg = nullptr;
    REQUIRE(rbp_config_create(&cfg) == RBP_OK);
    REQUIRE(rbp_config_load_preset(cfg, "smoke") == RBP_OK);
    const auto dir = (std::filesystem::temp_directory_path() / "rbpimd_capi_run").string();
    char* json = nullptr;
    REQUIRE(rbp_run_experiment(cfg, "spectrum-check", dir.c_str(), 1, &json) == RBP_OK);
    CHECK(std::string(json).find("\"operators\"") != std::string::npos);
    rbp_string_free(json);
    CHECK(rbp_run_experiment(cfg, "bogus", dir.c_str(), 1, nullptr) == RBP_INVALID_ARGUMENT);
    REQUIRE(rbp_config_set(cfg, "method", "pmmLang+split") == RBP_OK);
    CHECK(rbp_run_experiment(cfg, "run", dir.c_str(), 1, nullptr) == RBP_CONFIG);
    rbp_config_destroy(cfg);
    std::filesystem::remove_all(dir);
}
