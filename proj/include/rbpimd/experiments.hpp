#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rbpimd/config.hpp"

namespace rbpimd {

// ---- run: one trajectory, streaming time average -------------------------

struct TimeAverageRow {
    double t = 0.0;
    double running_average = 0.0;  ///< NaN until the first post-burn-in sample
    double weight = 0.0;
    int accepted = -1;              ///< -1 when no Metropolis test ran, else 0/1
    std::uint64_t pair_evals = 0;
    double wall_ms = 0.0;           ///< 0 unless timing is enabled
};

struct RunSummary {
    std::string preset;
    std::uint64_t seed = 0;
    std::string method;
    std::string observable;
    double mean = 0.0;
    double std_err = 0.0;
    double ac_time = 0.0;
    double eff_variance = 0.0;
    std::optional<double> rejection_rate;
    double pair_evals_per_step = 0.0;
    std::optional<double> wall_ms_per_step;  ///< median, only with timing enabled
    std::size_t steps = 0;
    std::size_t samples = 0;
    bool rbm_weight = false;
};

struct TimeAverageResult {
    RunSummary summary;
    PhaseState final_state;
};

using RowCallback = std::function<void(const TimeAverageRow&)>;

/// Runs one trajectory of config.method for system.total_time, feeding every
/// output.stride-th step to `on_row`. Trajectory id selects the random streams.
TimeAverageResult run_time_average(const ExperimentConfig& config, const RowCallback& on_row = {},
                                   std::uint64_t trajectory_id = 0,
                                   const PhaseState* initial = nullptr);

// ---- error-table ----------------------------------------------------------

struct ErrorTableRow {
    double dt = 0.0;
    std::string method;
    std::size_t batch_size = 0;
    double mean = 0.0;
    double std_err = 0.0;
    double rel_error = 0.0;
    double pair_evals_per_step = 0.0;
    std::optional<double> wall_ms_per_step;
};

struct ErrorTableResult {
    double reference_dt = 0.0;
    double reference_mean = 0.0;
    double reference_std_err = 0.0;
    std::vector<ErrorTableRow> rows;
    std::vector<std::string> warnings;
};

/// Exact run at error_table.reference_dt, then exact and RBM (each batch size)
/// runs at every dt in error_table.dts; relative errors against the reference.
ErrorTableResult run_error_table(const ExperimentConfig& config, unsigned threads = 1);

// ---- ensemble: weak error and relative entropy -----------------------------

struct RelativeEntropyRow {
    double t = 0.0;
    std::string method;
    std::string observable;  ///< "position_x" or "pair_distance"
    double value = 0.0;
};

struct EnsembleResult {
    std::string method_a;
    std::string method_b;
    bool paired = false;
    std::vector<WeakErrorPoint> weak;
    std::vector<RelativeEntropyRow> entropy;
};

/// Weak error between pmmLang and config.method over ensemble.n_trajectories
/// trajectories (shared seeds when the methods differ), plus relative-entropy
/// curves of single long runs against a longer pmmLang reference.
EnsembleResult run_ensemble(const ExperimentConfig& config, unsigned threads = 1);

// ---- strong-error ---------------------------------------------------------

struct StrongErrorCurve {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> error;
};

std::vector<StrongErrorCurve> run_strong_error(const ExperimentConfig& config,
                                               unsigned threads = 1);

// ---- rejection-table ------------------------------------------------------

struct RejectionRow {
    double dt = 0.0;
    std::size_t n_particles = 0;
    std::string method;
    std::size_t batch_size = 0;
    std::uint64_t tests = 0;
    std::uint64_t rejections = 0;
    double rate = 0.0;
};

std::vector<RejectionRow> run_rejection_table(const ExperimentConfig& config,
                                              unsigned threads = 1);

// ---- spectrum-check ---------------------------------------------------------

struct SpectrumReport {
    std::size_t n_beads = 0;
    std::vector<double> eigenvalues;  ///< ascending
    double stiffness_condition = 0.0;
    double frequency_condition = 0.0;
    double max_solve_discrepancy = 0.0;   ///< spectral vs tridiagonal, relative
    double max_inverse_residual = 0.0;    ///< |apply(solve(b)) - b| / |b|
    double max_sqrt_discrepancy = 0.0;    ///< |sqrt_inv(sqrt_inv(b)) - solve(b)| / |solve(b)|
};

std::vector<SpectrumReport> run_spectrum_check(const ExperimentConfig& config);

// ---- output ---------------------------------------------------------------

/// Writes "# schema=rbpimd.timeseries.v1" and the header line.
void write_time_average_header(std::ostream& out);
void write_time_average_row(std::ostream& out, const TimeAverageRow& row);
void write_error_table_csv(std::ostream& out, const ErrorTableResult& r);
void write_weak_error_csv(std::ostream& out, const EnsembleResult& r);
void write_relative_entropy_csv(std::ostream& out, const EnsembleResult& r);
void write_strong_error_csv(std::ostream& out, const std::vector<StrongErrorCurve>& r);
void write_rejection_table_csv(std::ostream& out, const std::vector<RejectionRow>& r);
void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumReport>& r);

/// JSON summaries. Every summary carries the keys preset, seed, method, mean,
/// std_err, ac_time, eff_variance, rejection_rate, pair_evals_per_step and
/// wall_ms_per_step (null where not meaningful) plus command-specific fields.
std::string summary_json(const ExperimentConfig& c, const RunSummary& s);
std::string summary_json(const ExperimentConfig& c, const ErrorTableResult& r);
std::string summary_json(const ExperimentConfig& c, const EnsembleResult& r);
std::string summary_json(const ExperimentConfig& c, const std::vector<StrongErrorCurve>& r);
std::string summary_json(const ExperimentConfig& c, const std::vector<RejectionRow>& r);
std::string summary_json(const ExperimentConfig& c, const std::vector<SpectrumReport>& r);

/// Runs a CLI subcommand ("run", "error-table", "ensemble", "strong-error",
/// "rejection-table", "spectrum-check"), writes its CSV files and summary.json
/// into out_dir and returns the summary JSON text.
std::string run_command(const ExperimentConfig& config, const std::string& command,
                        const std::filesystem::path& out_dir, unsigned threads = 1);

/// Names of the supported subcommands.
const std::vector<std::string>& command_names();

}  // namespace rbpimd
