#include "rbpimd/estimators.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "fftw_lock.hpp"

namespace rbpimd {

PairFunction Observable::pair_function() const {
    switch (kind) {
    case ObservableKind::CoulombPairAvg: {
        const auto coulomb = PairPotential::coulomb(kappa);
        return [coulomb](const Vec3& x) { return coulomb.value(x); };
    }
    case ObservableKind::GaussianPairAvg: {
        const double t = theta;
        return [t](const Vec3& x) { return std::exp(-t * norm2(x)); };
    }
    case ObservableKind::KineticVirial: break;
    }
    throw InvalidArgument("observable: kinetic_virial has no pair function");
}

std::string_view observable_name(ObservableKind k) {
    switch (k) {
    case ObservableKind::KineticVirial: return "kinetic_virial";
    case ObservableKind::CoulombPairAvg: return "coulomb_pair_avg";
    case ObservableKind::GaussianPairAvg: return "gaussian_pair_avg";
    }
    return "?";
}

ObservableKind parse_observable(std::string_view name) {
    for (auto k : {ObservableKind::KineticVirial, ObservableKind::CoulombPairAvg,
                   ObservableKind::GaussianPairAvg})
        if (name == observable_name(k)) return k;
    throw ConfigError("unknown observable '" + std::string(name) +
                      "' (expected kinetic_virial, coulomb_pair_avg or gaussian_pair_avg)");
}

double weight_position(const BeadGrid& q, const PairFunction& a) {
    double total = 0.0;
    for (std::size_t k = 0; k < q.n_beads(); ++k)
        for (std::size_t i = 0; i < q.n_particles(); ++i)
            for (std::size_t j = i + 1; j < q.n_particles(); ++j)
                total += a(q.at(k, i) - q.at(k, j));
    return total / (static_cast<double>(q.n_beads()) * static_cast<double>(q.n_particles()));
}

double weight_virial(const BeadGrid& q, const ForceField& grad, double alpha, double beta) {
    if (!grad.same_shape(q)) throw InvalidArgument("weight_virial: shape mismatch");
    const std::size_t n = q.n_beads();
    const std::size_t cols = q.n_cols();
    auto x = q.flat();
    auto g = grad.flat();
    std::vector<double> centre(cols, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t c = 0; c < cols; ++c) centre[c] += x[k * cols + c];
    for (double& c : centre) c /= static_cast<double>(n);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t i = k * cols + c;
            s += (x[i] - centre[c]) * (alpha * x[i] + g[i]);
        }
    return 1.5 * static_cast<double>(q.n_particles()) / beta + s / (2.0 * static_cast<double>(n));
}

double weight_virial_exact(const SystemSpec& spec, const BeadGrid& q) {
    return weight_virial(q, full_interaction_force(spec.potential, q), spec.alpha, spec.beta);
}

double weight_virial_rbm(const SystemSpec& spec, const BeadGrid& q, const Division& division) {
    return weight_virial(q, batch_force(spec.potential, q, division), spec.alpha, spec.beta);
}

double evaluate_weight(const SystemSpec& spec, const Observable& obs, const BeadGrid& q,
                       bool use_rbm, Rng& rng) {
    const bool batched = use_rbm && spec.batch_size < spec.n_particles;
    if (obs.kind == ObservableKind::KineticVirial) {
        if (!batched) return weight_virial_exact(spec, q);
        return weight_virial_rbm(spec, q, random_division(spec.n_particles, spec.batch_size, rng));
    }
    const auto a = obs.pair_function();
    if (!batched) return weight_position(q, a);
    return rbm_pairwise_observable(a, q, random_batch(spec.n_particles, spec.batch_size, rng));
}

void RunningStats::update(double t, double w) {
    if (t < burn_in_) return;
    ++count_;
    const double delta = w - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (w - mean_);
    if (keep_) series_.push_back(w);
}

void RunningStats::merge(const RunningStats& later) {
    if (later.count_ == 0) return;
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(later.count_);
    const double delta = later.mean_ - mean_;
    const double n = na + nb;
    mean_ += delta * nb / n;
    m2_ += later.m2_ + delta * delta * na * nb / n;
    count_ += later.count_;
    if (keep_) series_.insert(series_.end(), later.series_.begin(), later.series_.end());
}

namespace {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

// Unnormalized autocovariance sums sum_i x_i x_{i+l}, l = 0..max_lag, via a
// zero-padded circular correlation.
std::vector<double> autocovariance_sums(const std::vector<double>& x, std::size_t max_lag) {
    const std::size_t n = x.size();
    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;
    std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * m)));
    std::unique_ptr<fftw_complex, FftwFree> spec(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (m / 2 + 1))));
    fftw_plan forward;
    fftw_plan backward;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        forward = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.get(), spec.get(), FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_1d(static_cast<int>(m), spec.get(), in.get(), FFTW_ESTIMATE);
    }
    std::fill(in.get(), in.get() + m, 0.0);
    std::copy(x.begin(), x.end(), in.get());
    fftw_execute(forward);
    for (std::size_t k = 0; k <= m / 2; ++k) {
        const double re = spec.get()[k][0];
        const double im = spec.get()[k][1];
        spec.get()[k][0] = re * re + im * im;
        spec.get()[k][1] = 0.0;
    }
    fftw_execute(backward);
    std::vector<double> out(max_lag + 1);
    for (std::size_t l = 0; l <= max_lag; ++l) out[l] = in.get()[l] / static_cast<double>(m);
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }
    return out;
}

}  // namespace

AutocorrelationResult autocorrelation(std::span<const double> series, double dt,
                                      std::size_t max_lag) {
    const std::size_t n = series.size();
    if (n < 2) throw InvalidArgument("autocorrelation: need at least two samples");
    if (!(dt > 0.0)) throw InvalidArgument("autocorrelation: dt must be positive");
    if (max_lag == 0) max_lag = std::max<std::size_t>(1, n / 4);
    max_lag = std::min(max_lag, n - 1);

    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> centred(n);
    double var_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        centred[i] = series[i] - mean;
        var_sum += centred[i] * centred[i];
    }

    AutocorrelationResult r;
    r.variance = var_sum / static_cast<double>(n - 1);
    const double total_time = static_cast<double>(n) * dt;
    if (var_sum == 0.0) {
        r.degenerate = true;
        r.acf = {1.0};
        r.ac_time = dt;
        return r;
    }

    const auto sums = autocovariance_sums(centred, max_lag);
    r.acf.resize(max_lag + 1);
    r.acf[0] = 1.0;
    for (std::size_t l = 1; l <= max_lag; ++l) r.acf[l] = sums[l] / sums[0];

    double s = 0.0;
    std::size_t l = 1;
    for (; l <= max_lag && r.acf[l] >= 0.0; ++l) s += r.acf[l];
    r.cutoff_lag = l - 1;
    r.ac_time = dt * (1.0 + 2.0 * s);
    r.eff_variance = r.variance * r.ac_time / total_time;
    r.std_error = std::sqrt(r.eff_variance);
    return r;
}

Histogram::Histogram(double lo_, double hi_, std::size_t n_bins)
    : lo(lo_), hi(hi_), counts(n_bins, 0.0) {
    if (n_bins == 0) throw InvalidArgument("histogram: need at least one bin");
    if (!(hi >= lo)) throw InvalidArgument("histogram: empty range");
}

Histogram Histogram::of_reference(std::span<const double> reference, std::size_t n_bins) {
    if (reference.empty()) throw InvalidArgument("relative entropy: reference sample is empty");
    const auto [mn, mx] = std::minmax_element(reference.begin(), reference.end());
    Histogram h(*mn, *mx, n_bins);
    for (double x : reference) h.add(x);
    return h;
}

std::size_t Histogram::bin(double x) const {
    const std::size_t n = counts.size();
    if (!(hi > lo)) return 0;
    const double u = (x - lo) / (hi - lo) * static_cast<double>(n);
    if (!(u > 0.0)) return 0;
    if (u >= static_cast<double>(n)) return n - 1;
    return static_cast<std::size_t>(u);
}

void Histogram::add(double x) {
    counts[bin(x)] += 1.0;
    total += 1.0;
}

double relative_entropy(const Histogram& p, const Histogram& ref) {
    if (p.counts.size() != ref.counts.size() || p.lo != ref.lo || p.hi != ref.hi)
        throw InvalidArgument("relative entropy: histograms use different bins");
    if (ref.total <= 0.0) throw InvalidArgument("relative entropy: reference sample is empty");
    if (p.total <= 0.0) throw InvalidArgument("relative entropy: sample is empty");
    const std::size_t nb = p.counts.size();
    bool smooth = false;
    for (std::size_t i = 0; i < nb; ++i)
        if (p.counts[i] > 0.0 && ref.counts[i] == 0.0) smooth = true;
    const double eps = smooth ? 1.0 / (10.0 * ref.total) : 0.0;
    const double renorm = 1.0 + static_cast<double>(nb) * eps;
    double d = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
        if (p.counts[i] == 0.0) continue;
        const double pi = p.counts[i] / p.total;
        const double ri = (ref.counts[i] / ref.total + eps) / renorm;
        d += pi * std::log(pi / ri);
    }
    return std::max(d, 0.0);
}

double relative_entropy_1d(std::span<const double> samples, std::span<const double> reference,
                           std::size_t n_bins) {
    if (samples.empty()) throw InvalidArgument("relative entropy: sample is empty");
    const Histogram ref = Histogram::of_reference(reference, n_bins);
    Histogram p(ref.lo, ref.hi, n_bins);
    for (double x : samples) p.add(x);
    return relative_entropy(p, ref);
}

std::vector<WeakErrorPoint> weak_error_from_samples(const std::vector<std::vector<double>>& a,
                                                    const std::vector<std::vector<double>>& b,
                                                    std::span<const double> times, bool paired) {
    if (a.empty() || b.empty()) throw InvalidArgument("weak error: empty ensemble");
    if (paired && a.size() != b.size())
        throw InvalidArgument("weak error: paired ensembles must have equal size");
    std::vector<WeakErrorPoint> out(times.size());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    for (std::size_t t = 0; t < times.size(); ++t) {
        RunningStats sa, sb, sd;
        for (std::size_t r = 0; r < a.size(); ++r) sa.update(0.0, a[r].at(t));
        for (std::size_t r = 0; r < b.size(); ++r) sb.update(0.0, b[r].at(t));
        if (paired)
            for (std::size_t r = 0; r < a.size(); ++r) sd.update(0.0, a[r][t] - b[r][t]);
        WeakErrorPoint& pt = out[t];
        pt.t = times[t];
        pt.mean_a = sa.mean();
        pt.mean_b = sb.mean();
        pt.diff = pt.mean_a - pt.mean_b;
        pt.std_err = paired ? std::sqrt(sd.variance() / na)
                            : std::sqrt(sa.variance() / na + sb.variance() / nb);
    }
    return out;
}

}  // namespace rbpimd
