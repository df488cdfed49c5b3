#include "rbpimd/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#ifndef RBPIMD_PRESET_DIR
#define RBPIMD_PRESET_DIR "presets"
#endif

namespace rbpimd {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string format_real(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::size_t parse_count(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("expected a non-negative integer, got '" + text + "'");
    return static_cast<std::size_t>(std::stoull(t));
}

bool parse_bool(const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError("expected a boolean, got '" + text + "'");
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& text, Parse parse) {
    std::vector<T> out;
    for (const auto& item : split_list(text)) out.push_back(parse(item));
    if (out.empty()) throw ConfigError("expected a non-empty comma-separated list");
    return out;
}

template <class T, class Format>
std::string format_list(const std::vector<T>& xs, Format format) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += format(xs[i]);
    }
    return out;
}

struct Field {
    std::string key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <class Ref>
Field real_field(std::string key, Ref ref) {
    return {std::move(key),
            [ref](ExperimentConfig& c, const std::string& v) { ref(c) = parse_real(v); },
            [ref](const ExperimentConfig& c) {
                return format_real(ref(const_cast<ExperimentConfig&>(c)));
            }};
}

template <class Ref>
Field count_field(std::string key, Ref ref) {
    return {std::move(key),
            [ref](ExperimentConfig& c, const std::string& v) { ref(c) = parse_count(v); },
            [ref](const ExperimentConfig& c) {
                return std::to_string(ref(const_cast<ExperimentConfig&>(c)));
            }};
}

template <class Ref>
Field bool_field(std::string key, Ref ref) {
    return {std::move(key),
            [ref](ExperimentConfig& c, const std::string& v) { ref(c) = parse_bool(v); },
            [ref](const ExperimentConfig& c) {
                return std::string(ref(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
            }};
}

template <class Ref>
Field real_list_field(std::string key, Ref ref) {
    return {std::move(key),
            [ref](ExperimentConfig& c, const std::string& v) {
                ref(c) = parse_list<double>(v, parse_real);
            },
            [ref](const ExperimentConfig& c) {
                return format_list(ref(const_cast<ExperimentConfig&>(c)), format_real);
            }};
}

template <class Ref>
Field count_list_field(std::string key, Ref ref) {
    return {std::move(key),
            [ref](ExperimentConfig& c, const std::string& v) {
                ref(c) = parse_list<std::size_t>(v, parse_count);
            },
            [ref](const ExperimentConfig& c) {
                return format_list(ref(const_cast<ExperimentConfig&>(c)),
                                   [](std::size_t x) { return std::to_string(x); });
            }};
}

const std::vector<Field>& fields() {
    using C = ExperimentConfig;
    static const std::vector<Field> table = {
        real_field("system.mass", [](C& c) -> double& { return c.system.mass; }),
        real_field("system.beta", [](C& c) -> double& { return c.system.beta; }),
        count_field("system.n_beads", [](C& c) -> std::size_t& { return c.system.n_beads; }),
        count_field("system.n_particles",
                    [](C& c) -> std::size_t& { return c.system.n_particles; }),
        Field{"system.alpha",
              [](C& c, const std::string& v) {
                  c.system.alpha = parse_real(v);
                  c.alpha_explicit = true;
              },
              [](const C& c) { return format_real(c.system.alpha); }},
        real_field("system.gamma", [](C& c) -> double& { return c.system.gamma; }),
        real_field("system.dt", [](C& c) -> double& { return c.system.dt; }),
        real_field("system.total_time", [](C& c) -> double& { return c.system.total_time; }),
        count_field("system.batch_size", [](C& c) -> std::size_t& { return c.system.batch_size; }),
        Field{"system.seed",
              [](C& c, const std::string& v) { c.system.seed = parse_count(v); },
              [](const C& c) { return std::to_string(c.system.seed); }},
        Field{"potential.kind",
              [](C& c, const std::string& v) {
                  const std::string t = trim(v);
                  if (t != "coulomb" && t != "mixed")
                      throw ConfigError("expected 'coulomb' or 'mixed', got '" + v + "'");
                  c.potential_kind = t;
              },
              [](const C& c) { return c.potential_kind; }},
        real_field("potential.kappa", [](C& c) -> double& { return c.kappa; }),
        real_field("potential.sigma", [](C& c) -> double& { return c.sigma; }),
        Field{"method",
              [](C& c, const std::string& v) { c.method = parse_method(trim(v)); },
              [](const C& c) { return std::string(method_name(c.method)); }},
        Field{"observable",
              [](C& c, const std::string& v) { c.observable.kind = parse_observable(trim(v)); },
              [](const C& c) { return std::string(observable_name(c.observable.kind)); }},
        real_field("observable.theta", [](C& c) -> double& { return c.observable.theta; }),
        bool_field("estimator.rbm_weight", [](C& c) -> bool& { return c.rbm_weight; }),
        real_field("estimator.burn_in", [](C& c) -> double& { return c.burn_in; }),
        count_field("output.stride", [](C& c) -> std::size_t& { return c.output_stride; }),
        bool_field("output.timing", [](C& c) -> bool& { return c.timing; }),
        bool_field("output.snapshot", [](C& c) -> bool& { return c.output_snapshot; }),
        Field{"input.snapshot",
              [](C& c, const std::string& v) { c.input_snapshot = trim(v); },
              [](const C& c) { return c.input_snapshot; }},
        bool_field("dynamics.fresh_division_per_substep",
                   [](C& c) -> bool& { return c.dynamics.fresh_division_per_substep; }),
        real_list_field("error_table.dts",
                        [](C& c) -> std::vector<double>& { return c.error_table.dts; }),
        count_list_field("error_table.batch_sizes", [](C& c) -> std::vector<std::size_t>& {
            return c.error_table.batch_sizes;
        }),
        real_field("error_table.reference_dt",
                   [](C& c) -> double& { return c.error_table.reference_dt; }),
        count_field("ensemble.n_trajectories",
                    [](C& c) -> std::size_t& { return c.ensemble.n_trajectories; }),
        real_field("ensemble.total_time", [](C& c) -> double& { return c.ensemble.total_time; }),
        real_field("ensemble.record_interval",
                   [](C& c) -> double& { return c.ensemble.record_interval; }),
        bool_field("relative_entropy.enabled",
                   [](C& c) -> bool& { return c.relative_entropy.enabled; }),
        real_field("relative_entropy.total_time",
                   [](C& c) -> double& { return c.relative_entropy.total_time; }),
        real_field("relative_entropy.reference_time",
                   [](C& c) -> double& { return c.relative_entropy.reference_time; }),
        real_field("relative_entropy.burn_in",
                   [](C& c) -> double& { return c.relative_entropy.burn_in; }),
        count_field("relative_entropy.bins",
                    [](C& c) -> std::size_t& { return c.relative_entropy.bins; }),
        real_list_field("relative_entropy.checkpoints", [](C& c) -> std::vector<double>& {
            return c.relative_entropy.checkpoints;
        }),
        bool_field("relative_entropy.pool_beads",
                   [](C& c) -> bool& { return c.relative_entropy.pool_beads; }),
        real_list_field("strong_error.dts",
                        [](C& c) -> std::vector<double>& { return c.strong_error.dts; }),
        count_field("strong_error.replicas",
                    [](C& c) -> std::size_t& { return c.strong_error.replicas; }),
        real_field("strong_error.total_time",
                   [](C& c) -> double& { return c.strong_error.total_time; }),
        count_list_field("rejection_table.particles", [](C& c) -> std::vector<std::size_t>& {
            return c.rejection_table.particles;
        }),
        real_list_field("rejection_table.dts",
                        [](C& c) -> std::vector<double>& { return c.rejection_table.dts; }),
        Field{"rejection_table.methods",
              [](C& c, const std::string& v) {
                  c.rejection_table.methods =
                      parse_list<Method>(v, [](const std::string& s) { return parse_method(s); });
              },
              [](const C& c) {
                  return format_list(c.rejection_table.methods,
                                     [](Method m) { return std::string(method_name(m)); });
              }},
        count_list_field("rejection_table.batch_sizes", [](C& c) -> std::vector<std::size_t>& {
            return c.rejection_table.batch_sizes;
        }),
        count_list_field("spectrum.n_beads",
                         [](C& c) -> std::vector<std::size_t>& { return c.spectrum.n_beads; }),
        count_field("spectrum.random_inputs",
                    [](C& c) -> std::size_t& { return c.spectrum.random_inputs; }),
    };
    return table;
}

}  // namespace

double parse_real(const std::string& text) {
    const std::string t = trim(text);
    auto parse_one = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw ConfigError("expected a real number, got '" + text + "'");
        }
        if (used != s.size()) throw ConfigError("expected a real number, got '" + text + "'");
        return v;
    };
    const auto slash = t.find('/');
    if (slash == std::string::npos) return parse_one(t);
    const double num = parse_one(trim(t.substr(0, slash)));
    const double den = parse_one(trim(t.substr(slash + 1)));
    if (den == 0.0) throw ConfigError("division by zero in '" + text + "'");
    return num / den;
}

ExperimentConfig::ExperimentConfig() {
    system.mass = 1.0;
    system.beta = 4.0;
    system.n_beads = 16;
    system.n_particles = 8;
    system.gamma = 2.0;
    system.dt = 1.0 / 16;
    system.total_time = 1000.0;
    system.batch_size = 2;
    system.seed = 1;
    finalize();
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    for (const auto& f : fields()) {
        if (f.key != key) continue;
        try {
            f.set(*this, value);
        } catch (const ConfigError& e) {
            throw ConfigError(key + ": " + e.what());
        }
        return;
    }
    throw ConfigError(key + ": unknown configuration key");
}

void ExperimentConfig::apply_text(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        try {
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void ExperimentConfig::apply_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    apply_text(buf.str(), path.string());
}

void ExperimentConfig::finalize() {
    system.potential = potential_kind == "mixed" ? PairPotential::mixed(sigma)
                                                : PairPotential::coulomb(kappa);
    if (!alpha_explicit && system.n_particles > 0) system.alpha = default_alpha(system.n_particles);
}

void ExperimentConfig::validate() const {
    system.validate();
    if (!(kappa > 0.0)) throw ConfigError("potential.kappa: must be positive");
    if (!(sigma > 0.0)) throw ConfigError("potential.sigma: must be positive");
    if (method_uses_split(method) && potential_kind != "mixed")
        throw ConfigError("method: " + std::string(method_name(method)) +
                          " requires potential.kind = mixed");
    if (method_uses_rbm(method) && system.n_particles < 2)
        throw ConfigError("method: random batches need at least two particles");
    if (!(observable.theta > 0.0)) throw ConfigError("observable.theta: must be positive");
    if (!(burn_in >= 0.0)) throw ConfigError("estimator.burn_in: must be non-negative");
    if (output_stride == 0) throw ConfigError("output.stride: must be positive");
    for (double dt : error_table.dts)
        if (!(dt > 0.0)) throw ConfigError("error_table.dts: entries must be positive");
    if (!(error_table.reference_dt > 0.0))
        throw ConfigError("error_table.reference_dt: must be positive");
    for (std::size_t p : error_table.batch_sizes)
        if (p < 2 || system.n_particles % p != 0)
            throw ConfigError("error_table.batch_sizes: each p must satisfy 2 <= p and p | P");
    if (ensemble.n_trajectories == 0)
        throw ConfigError("ensemble.n_trajectories: must be positive");
    if (!(ensemble.total_time > 0.0)) throw ConfigError("ensemble.total_time: must be positive");
    if (!(ensemble.record_interval > 0.0))
        throw ConfigError("ensemble.record_interval: must be positive");
    if (relative_entropy.bins == 0) throw ConfigError("relative_entropy.bins: must be positive");
    if (!(relative_entropy.total_time > 0.0) || !(relative_entropy.reference_time > 0.0))
        throw ConfigError("relative_entropy: total_time and reference_time must be positive");
    if (strong_error.replicas == 0) throw ConfigError("strong_error.replicas: must be positive");
    for (double dt : strong_error.dts)
        if (!(dt > 0.0)) throw ConfigError("strong_error.dts: entries must be positive");
    for (double dt : rejection_table.dts)
        if (!(dt > 0.0)) throw ConfigError("rejection_table.dts: entries must be positive");
    for (std::size_t n : spectrum.n_beads)
        if (n < 4 || n % 2 != 0) throw ConfigError("spectrum.n_beads: entries must be even and >= 4");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : fields()) out.emplace_back(f.key, f.get(*this));
    return out;
}

std::vector<std::string> ExperimentConfig::keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
}

std::vector<std::filesystem::path> preset_search_path() {
    std::vector<std::filesystem::path> dirs;
    if (const char* env = std::getenv("RBPIMD_PRESET_PATH")) {
        std::stringstream ss(env);
        std::string dir;
        while (std::getline(ss, dir, ':'))
            if (!dir.empty()) dirs.emplace_back(dir);
    }
    dirs.emplace_back(RBPIMD_PRESET_DIR);
    return dirs;
}

std::filesystem::path find_preset(const std::string& name) {
    if (name.empty() || name.find('/') != std::string::npos)
        throw ConfigError("preset: invalid name '" + name + "'");
    for (const auto& dir : preset_search_path()) {
        const auto candidate = dir / (name + ".cfg");
        if (std::filesystem::is_regular_file(candidate)) return candidate;
    }
    throw ConfigError("preset: '" + name + "' not found (see RBPIMD_PRESET_PATH)");
}

std::vector<std::string> list_presets() {
    std::set<std::string> names;
    for (const auto& dir : preset_search_path()) {
        std::error_code ec;
        for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
            if (entry.path().extension() == ".cfg") names.insert(entry.path().stem().string());
    }
    return {names.begin(), names.end()};
}

ExperimentConfig load_config(const std::string& preset, const std::filesystem::path& file,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
    ExperimentConfig c;
    if (!preset.empty()) {
        c.apply_file(find_preset(preset));
        c.preset = preset;
    }
    if (!file.empty()) {
        c.apply_file(file);
        if (c.preset.empty()) c.preset = file.stem().string();
    }
    for (const auto& [k, v] : overrides) c.set(k, v);
    c.finalize();
    c.validate();
    return c;
}

}  // namespace rbpimd
