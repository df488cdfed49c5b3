#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbpimd/rbm.hpp"
#include "rbpimd/system.hpp"

namespace rbpimd {

enum class ObservableKind { KineticVirial, CoulombPairAvg, GaussianPairAvg };

struct Observable {
    ObservableKind kind = ObservableKind::KineticVirial;
    double kappa = 1.0;  ///< Coulomb strength for CoulombPairAvg
    double theta = 0.1;  ///< decay rate for GaussianPairAvg

    /// Pair function a(q) for the pair-average kinds.
    PairFunction pair_function() const;
    bool is_pair_average() const { return kind != ObservableKind::KineticVirial; }
};

/// "kinetic_virial", "coulomb_pair_avg", "gaussian_pair_avg".
std::string_view observable_name(ObservableKind k);
ObservableKind parse_observable(std::string_view name);

/// (1/N) sum_k A(q_k), A(x) = (1/P) sum_{i<j} a(x^i - x^j).
double weight_position(const BeadGrid& q, const PairFunction& a);

/// 3P/(2 beta) + (1/2N) <q - qbar, alpha q + G>_F, with G the interaction-gradient field
/// (exact or batch-approximated).
double weight_virial(const BeadGrid& q, const ForceField& grad, double alpha, double beta);

/// Virial weight with G computed exactly from `potential`.
double weight_virial_exact(const SystemSpec& spec, const BeadGrid& q);
/// Virial weight with G from a batch force over `division`.
double weight_virial_rbm(const SystemSpec& spec, const BeadGrid& q, const Division& division);

/// Evaluates an observable's weight on q, exactly or with a fresh random batch
/// / division drawn from `rng` (only consumed when `use_rbm` and p < P).
double evaluate_weight(const SystemSpec& spec, const Observable& obs, const BeadGrid& q,
                       bool use_rbm, Rng& rng);

/// Streaming mean of a weight series, with samples before `burn_in_time` excluded.
class RunningStats {
public:
    explicit RunningStats(double burn_in_time = 0.0, bool keep_series = true)
        : burn_in_(burn_in_time), keep_(keep_series) {}

    /// Records the sample taken at time t.
    void update(double t, double w);
    /// Merges another accumulator whose samples all come after this one's.
    void merge(const RunningStats& later);

    std::size_t count() const { return count_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance of the retained samples.
    double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
    const std::vector<double>& series() const { return series_; }
    double burn_in_time() const { return burn_in_; }

private:
    double burn_in_;
    bool keep_;
    std::size_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    std::vector<double> series_;
};

struct AutocorrelationResult {
    std::vector<double> acf;  ///< rho_0 .. rho_max_lag; rho_0 = 1
    double ac_time = 0.0;     ///< dt (1 + 2 sum_{l>=1} rho_l), truncated before the first negative rho
    std::size_t cutoff_lag = 0;
    double variance = 0.0;        ///< sample variance
    double eff_variance = 0.0;    ///< variance * ac_time / (n dt)
    double std_error = 0.0;       ///< sqrt(eff_variance)
    bool degenerate = false;      ///< constant series: acf undefined
};

/// Empirical normalized autocovariance computed by FFT.
/// max_lag = 0 selects n/4.
AutocorrelationResult autocorrelation(std::span<const double> series, double dt,
                                      std::size_t max_lag = 0);

/// Histogram estimate of D(samples || reference) on n_bins equal bins spanning
/// the reference range. Samples outside the range fall into the edge bins.
/// When a sample bin is non-empty but its reference bin is empty, the reference
/// histogram is smoothed by eps = 1/(10 n_ref) per bin and renormalized.
double relative_entropy_1d(std::span<const double> samples, std::span<const double> reference,
                           std::size_t n_bins);

/// Common histogram range for relative_entropy_1d, so a reference can be binned once.
struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> counts;
    double total = 0.0;

    Histogram(double lo, double hi, std::size_t n_bins);
    static Histogram of_reference(std::span<const double> reference, std::size_t n_bins);
    void add(double x);
    std::size_t bin(double x) const;
};

/// D(p || ref) on two histograms with identical bins, smoothing as in relative_entropy_1d.
double relative_entropy(const Histogram& p, const Histogram& ref);

struct WeakErrorPoint {
    double t = 0.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double diff = 0.0;      ///< mean_a - mean_b
    double std_err = 0.0;   ///< standard error of the difference of means
};

/// Weak error from per-trajectory weight tables (trajectory x time) of two methods.
std::vector<WeakErrorPoint> weak_error_from_samples(const std::vector<std::vector<double>>& a,
                                                    const std::vector<std::vector<double>>& b,
                                                    std::span<const double> times,
                                                    bool paired);

}  // namespace rbpimd
