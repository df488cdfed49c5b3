#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "rbpimd/config.hpp"

using namespace rbpimd;

TEST_CASE("defaults") {
    ExperimentConfig c;
    CHECK(c.system.n_beads == 16);
    CHECK(c.system.n_particles == 8);
    CHECK(c.system.alpha == doctest::Approx(0.25));
    CHECK(c.method == Method::Exact);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("parse_real accepts fractions") {
    CHECK(parse_real("1/16") == 0.0625);
    CHECK(parse_real(" 2.5 ") == 2.5);
    CHECK(parse_real("1e-3") == 0.001);
    CHECK_THROWS_AS(parse_real("1/0"), ConfigError);
    CHECK_THROWS_AS(parse_real("abc"), ConfigError);
    CHECK_THROWS_AS(parse_real("1.5x"), ConfigError);
}

TEST_CASE("alpha follows P unless set") {
    ExperimentConfig c;
    c.set("system.n_particles", "27");
    c.finalize();
    CHECK(c.system.alpha == doctest::Approx(1.0 / 9));
    c.set("system.alpha", "0.5");
    c.set("system.n_particles", "8");
    c.finalize();
    CHECK(c.system.alpha == 0.5);
}

TEST_CASE("text application and errors name the location") {
    ExperimentConfig c;
    c.apply_text("# comment\nsystem.dt = 1/32   # trailing\n\nmethod = pmmLang+RBM\n");
    CHECK(c.system.dt == 1.0 / 32);
    CHECK(c.method == Method::Rbm);
    CHECK_THROWS_WITH_AS(c.apply_text("system.dt = 1/32\nsystem.bogus = 1\n", "f.cfg"),
                         doctest::Contains("f.cfg:2: system.bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(c.apply_text("no equals sign"), doctest::Contains("expected 'key = value'"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(c.set("system.n_beads", "-4"), doctest::Contains("system.n_beads"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(c.set("method", "fast"), doctest::Contains("method: unknown method"),
                         ConfigError);
}

TEST_CASE("every key round trips through entries") {
    ExperimentConfig c;
    c.set("potential.kind", "mixed");
    c.set("method", "pmmLang+RBM+split");
    c.set("error_table.dts", "1/4, 1/8");
    c.finalize();
    ExperimentConfig d;
    for (const auto& [k, v] : c.entries()) d.set(k, v);
    d.finalize();
    CHECK(d.entries() == c.entries());
    CHECK(ExperimentConfig::keys().size() == c.entries().size());
}

TEST_CASE("cross-field validation") {
    ExperimentConfig c;
    c.set("method", "pmmLang+split");
    c.finalize();
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("potential.kind = mixed"), ConfigError);
    c.set("potential.kind", "mixed");
    c.finalize();
    CHECK_NOTHROW(c.validate());
    c.set("system.batch_size", "3");
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(c.set("potential.kind", "yukawa"), ConfigError);
}

TEST_CASE("presets load and override order holds") {
    const auto names = list_presets();
    CHECK(std::find(names.begin(), names.end(), "smoke") != names.end());
    const auto c = load_config("smoke", {}, {{"system.seed", "99"}});
    CHECK(c.preset == "smoke");
    CHECK(c.system.n_beads == 4);
    CHECK(c.system.seed == 99);
    CHECK_THROWS_AS(load_config("no-such-preset", {}, {}), ConfigError);
    CHECK_THROWS_AS(load_config("../smoke", {}, {}), ConfigError);
}

TEST_CASE("every shipped preset validates") {
    for (const auto& name : list_presets()) {
        CAPTURE(name);
        CHECK_NOTHROW(load_config(name, {}, {}));
    }
}

TEST_CASE("config file on top of a preset") {
    const auto path = std::filesystem::temp_directory_path() / "rbpimd_unit_cfg.cfg";
    {
        std::ofstream out(path);
        out << "system.n_particles = 8\nsystem.total_time = 2\n";
    }
    const auto c = load_config("smoke", path, {});
    CHECK(c.system.n_particles == 8);
    CHECK(c.system.n_beads == 4);
    CHECK(c.system.alpha == doctest::Approx(0.25));
    std::filesystem::remove(path);
}
