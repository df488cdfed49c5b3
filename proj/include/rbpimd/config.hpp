#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rbpimd/dynamics.hpp"
#include "rbpimd/estimators.hpp"
#include "rbpimd/system.hpp"

namespace rbpimd {

struct ErrorTableOptions {
    std::vector<double> dts{1.0 / 2, 1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    std::vector<std::size_t> batch_sizes{2, 4};
    double reference_dt = 1.0 / 64;
};

struct EnsembleOptions {
    std::size_t n_trajectories = 1000;
    double total_time = 20.0;
    double record_interval = 0.25;
};

struct RelativeEntropyOptions {
    bool enabled = true;
    double total_time = 1e4;
    double reference_time = 5e4;
    double burn_in = 0.0;
    std::size_t bins = 50;
    std::vector<double> checkpoints{1e2, 3e2, 1e3, 3e3, 1e4};
    /// Pool exchangeable beads (same particle) into the histograms.
    bool pool_beads = false;
};

struct StrongErrorOptions {
    std::vector<double> dts{1.0 / 4, 1.0 / 8, 1.0 / 16};
    std::size_t replicas = 1000;
    double total_time = 20.0;
};

struct RejectionTableOptions {
    std::vector<std::size_t> particles{8, 16, 24, 32};
    std::vector<double> dts{1.0 / 8, 1.0 / 16, 1.0 / 32};
    std::vector<Method> methods{Method::Split, Method::RbmSplit};
    std::vector<std::size_t> batch_sizes{2, 4};
};

struct SpectrumOptions {
    std::vector<std::size_t> n_beads{4, 8, 16, 32};
    std::size_t random_inputs = 100;
};

/// Everything one CLI subcommand needs. Built from defaults, then a preset or
/// config file, then individual overrides.
struct ExperimentConfig {
    std::string preset;
    SystemSpec system;
    /// False until system.alpha is given explicitly; alpha then tracks P^{-2/3}.
    bool alpha_explicit = false;
    /// "coulomb" or "mixed"; system.potential is rebuilt from these by finalize().
    std::string potential_kind = "coulomb";
    double kappa = 1.0;
    double sigma = 0.3;
    Method method = Method::Exact;
    Observable observable;
    /// Estimate the weight with random batches too, not only the force.
    bool rbm_weight = false;
    double burn_in = 50.0;
    std::size_t output_stride = 1;
    /// Record wall-clock time per step. Off by default so outputs are reproducible.
    bool timing = false;
    /// Write the final phase state of `run` as a snapshot (binary and CSV).
    bool output_snapshot = false;
    /// Start `run` from this snapshot instead of a random initial state.
    std::string input_snapshot;
    DynamicsOptions dynamics;

    ErrorTableOptions error_table;
    EnsembleOptions ensemble;
    RelativeEntropyOptions relative_entropy;
    StrongErrorOptions strong_error;
    RejectionTableOptions rejection_table;
    SpectrumOptions spectrum;

    ExperimentConfig();

    /// Sets one dotted key from its textual value; throws ConfigError naming the key.
    void set(const std::string& key, const std::string& value);
    /// Applies "key = value" lines; '#' starts a comment.
    void apply_text(const std::string& text, const std::string& source = "<text>");
    void apply_file(const std::filesystem::path& path);
    /// Builds the pair potential and re-derives alpha from P when it was never set explicitly.
    void finalize();
    /// Checks cross-field constraints (method/potential compatibility, ranges).
    void validate() const;

    /// All keys with their current values in a stable order.
    std::vector<std::pair<std::string, std::string>> entries() const;
    /// Names of every recognized key.
    static std::vector<std::string> keys();
};

/// Parses a real; accepts a simple fraction "a/b".
double parse_real(const std::string& text);

/// Directories searched for "<name>.cfg": $RBPIMD_PRESET_PATH (':'-separated),
/// then the compiled-in preset directory.
std::vector<std::filesystem::path> preset_search_path();
std::filesystem::path find_preset(const std::string& name);
std::vector<std::string> list_presets();

/// Defaults, then the named preset (if non-empty), then the file (if non-empty),
/// then overrides, then finalize() and validate().
ExperimentConfig load_config(const std::string& preset, const std::filesystem::path& file,
                             const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace rbpimd
