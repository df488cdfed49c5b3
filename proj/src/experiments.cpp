#include "rbpimd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "parallel.hpp"

namespace rbpimd {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t steps_for(double total_time, double dt) {
    return static_cast<std::size_t>(std::llround(total_time / dt));
}

double median(std::vector<double> xs) {
    if (xs.empty()) return kNaN;
    const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
    std::nth_element(xs.begin(), mid, xs.end());
    return *mid;
}

PhaseState load_initial_state(const ExperimentConfig& config, const RingOperator& ring) {
    PhaseState s;
    load_snapshot(config.input_snapshot, s.q, s.v);
    if (s.q.n_beads() != config.system.n_beads || s.q.n_particles() != config.system.n_particles)
        throw ConfigError("input.snapshot: shape " + std::to_string(s.q.n_beads()) + "x" +
                          std::to_string(s.q.n_particles()) + " does not match the system");
    if (s.v.size() == 0) {
        // Position-only snapshot: draw velocities from their stationary law.
        s.v = BeadGrid(s.q.n_beads(), s.q.n_particles());
        Rng rng = make_rng(config.system.seed, 0, Stream::Init);
        ring.sample_gaussian(rng, s.v.flat(), s.v.n_cols());
        const double scale = 1.0 / std::sqrt(config.system.beta_n());
        for (double& x : s.v.flat()) x *= scale;
    }
    return s;
}

}  // namespace

TimeAverageResult run_time_average(const ExperimentConfig& config, const RowCallback& on_row,
                                   std::uint64_t trajectory_id, const PhaseState* initial) {
    const SystemSpec& spec = config.system;
    Sampler sampler(spec, config.method, trajectory_id, config.dynamics);
    if (initial) {
        sampler.set_state(*initial);
    } else if (!config.input_snapshot.empty()) {
        sampler.set_state(load_initial_state(config, sampler.ring()));
    }

    const std::size_t steps = spec.steps();
    const bool cached_virial = config.observable.kind == ObservableKind::KineticVirial &&
                               !config.rbm_weight && sampler.strategy() == ForceStrategy::Exact;
    RunningStats stats(config.burn_in);
    std::vector<double> wall;
    if (config.timing) wall.reserve(steps);
    const std::uint64_t evals_start = sampler.pair_evals();

    for (std::size_t j = 1; j <= steps; ++j) {
        const StepOutcome outcome = sampler.step();
        const double t = static_cast<double>(j) * spec.dt;
        const BeadGrid& q = sampler.state().q;
        const double w = cached_virial
                             ? weight_virial(q, sampler.gradient(), spec.alpha, spec.beta)
                             : evaluate_weight(spec, config.observable, q, config.rbm_weight,
                                               sampler.weight_rng());
        stats.update(t, w);
        if (config.timing) wall.push_back(outcome.elapsed_ms);
        if (on_row && j % config.output_stride == 0) {
            TimeAverageRow row;
            row.t = t;
            row.running_average = stats.count() ? stats.mean() : kNaN;
            row.weight = w;
            row.accepted = outcome.accepted ? (*outcome.accepted ? 1 : 0) : -1;
            row.pair_evals = outcome.pair_evals;
            row.wall_ms = config.timing ? outcome.elapsed_ms : 0.0;
            on_row(row);
        }
    }

    TimeAverageResult result;
    RunSummary& s = result.summary;
    s.preset = config.preset;
    s.seed = spec.seed;
    s.method = std::string(method_name(config.method));
    s.observable = std::string(observable_name(config.observable.kind));
    s.rbm_weight = config.rbm_weight;
    s.steps = steps;
    s.samples = stats.count();
    s.mean = stats.count() ? stats.mean() : kNaN;
    if (stats.count() >= 2) {
        const auto ac = autocorrelation(stats.series(), spec.dt);
        s.ac_time = ac.ac_time;
        s.eff_variance = ac.eff_variance;
        s.std_err = ac.std_error;
    } else {
        s.ac_time = s.eff_variance = s.std_err = kNaN;
    }
    if (method_uses_split(config.method) && sampler.metropolis_tests() > 0)
        s.rejection_rate = static_cast<double>(sampler.rejections()) /
                           static_cast<double>(sampler.metropolis_tests());
    s.pair_evals_per_step =
        steps ? static_cast<double>(sampler.pair_evals() - evals_start) / static_cast<double>(steps)
              : 0.0;
    if (config.timing) s.wall_ms_per_step = median(wall);
    result.final_state = sampler.state();
    return result;
}

ErrorTableResult run_error_table(const ExperimentConfig& config, unsigned threads) {
    struct Job {
        double dt;
        Method method;
        std::size_t batch_size;
    };
    const std::size_t np = config.system.n_particles;
    const Method rbm_method = method_uses_split(config.method) ? Method::RbmSplit : Method::Rbm;
    const Method exact_method = method_uses_split(config.method) ? Method::Split : Method::Exact;

    std::vector<Job> jobs{{config.error_table.reference_dt, exact_method, np}};
    for (double dt : config.error_table.dts) {
        jobs.push_back({dt, exact_method, np});
        for (std::size_t p : config.error_table.batch_sizes) jobs.push_back({dt, rbm_method, p});
    }

    std::vector<RunSummary> results(jobs.size());
    // An exact row at the reference step repeats the reference run bit for bit.
    auto is_reference_repeat = [&](std::size_t i) {
        return i > 0 && jobs[i].method == exact_method && jobs[i].dt == jobs[0].dt;
    };
    detail::parallel_for(jobs.size(), threads, [&](std::size_t i) {
        if (is_reference_repeat(i)) return;
        ExperimentConfig c = config;
        c.system.dt = jobs[i].dt;
        c.method = jobs[i].method;
        c.system.batch_size = jobs[i].batch_size;
        results[i] = run_time_average(c).summary;
    });

    ErrorTableResult r;
    r.reference_dt = config.error_table.reference_dt;
    r.reference_mean = results[0].mean;
    r.reference_std_err = results[0].std_err;
    for (std::size_t i = 1; i < jobs.size(); ++i)
        if (is_reference_repeat(i)) results[i] = results[0];
    for (std::size_t i = 1; i < jobs.size(); ++i) {
        ErrorTableRow row;
        row.dt = jobs[i].dt;
        row.method = results[i].method;
        row.batch_size = jobs[i].batch_size;
        row.mean = results[i].mean;
        row.std_err = results[i].std_err;
        row.rel_error = std::abs(results[i].mean - r.reference_mean) / std::abs(r.reference_mean);
        row.pair_evals_per_step = results[i].pair_evals_per_step;
        row.wall_ms_per_step = results[i].wall_ms_per_step;
        r.rows.push_back(row);
    }

    // Larger batches should not be less accurate; single paths can violate this by chance.
    for (std::size_t i = 0; i + 1 < r.rows.size(); ++i) {
        const auto& a = r.rows[i];
        const auto& b = r.rows[i + 1];
        if (a.dt != b.dt || a.method != b.method || a.method == std::string(method_name(exact_method)))
            continue;
        if (b.batch_size > a.batch_size && b.rel_error > a.rel_error) {
            std::ostringstream msg;
            msg << "dt=" << a.dt << ": relative error at p=" << b.batch_size << " ("
                << b.rel_error << ") exceeds p=" << a.batch_size << " (" << a.rel_error << ")";
            r.warnings.push_back(msg.str());
        }
    }
    return r;
}

namespace {

struct ObservableSeries {
    std::vector<double> position_x;
    std::vector<double> pair_distance;
};

void record_histogram_observables(const BeadGrid& q, bool pool, ObservableSeries& out) {
    const std::size_t beads = pool ? q.n_beads() : 1;
    for (std::size_t k = 0; k < beads; ++k) {
        const Vec3 a = q.at(k, 0);
        out.position_x.push_back(a.x);
        if (q.n_particles() >= 2) out.pair_distance.push_back(norm(a - q.at(k, 1)));
    }
}

ObservableSeries sample_observables(const SystemSpec& spec, Method method,
                                    std::shared_ptr<const RingOperator> ring,
                                    std::uint64_t trajectory_id, double total_time,
                                    double burn_in, bool pool, DynamicsOptions options,
                                    std::vector<std::size_t>* counts_at = nullptr,
                                    const std::vector<double>* checkpoints = nullptr) {
    Sampler sampler(spec, method, std::move(ring), trajectory_id, options);
    ObservableSeries out;
    const std::size_t steps = steps_for(total_time, spec.dt);
    std::size_t next = 0;
    for (std::size_t j = 1; j <= steps; ++j) {
        sampler.step();
        const double t = static_cast<double>(j) * spec.dt;
        if (t >= burn_in) record_histogram_observables(sampler.state().q, pool, out);
        // Checkpoint counts index position_x; pair_distance grows in lockstep.
        if (checkpoints && counts_at) {
            while (next < checkpoints->size() && t + 1e-9 >= (*checkpoints)[next]) {
                counts_at->push_back(out.position_x.size());
                ++next;
            }
        }
    }
    if (checkpoints && counts_at)
        while (counts_at->size() < checkpoints->size()) counts_at->push_back(out.position_x.size());
    return out;
}

}  // namespace

EnsembleResult run_ensemble(const ExperimentConfig& config, unsigned threads) {
    const SystemSpec& spec = config.system;
    const Method method_b = config.method;
    const bool paired = method_b != Method::Exact;
    auto ring = std::make_shared<const RingOperator>(spec.n_beads, spec.mass, spec.beta, spec.alpha);

    const std::size_t n_traj = config.ensemble.n_trajectories;
    const std::size_t steps = steps_for(config.ensemble.total_time, spec.dt);
    const std::size_t stride =
        std::max<std::size_t>(1, steps_for(config.ensemble.record_interval, spec.dt));
    const std::size_t n_rec = steps / stride + 1;
    std::vector<double> times(n_rec);
    for (std::size_t i = 0; i < n_rec; ++i) times[i] = static_cast<double>(i * stride) * spec.dt;

    std::vector<std::vector<double>> wa(n_traj), wb(n_traj);
    detail::parallel_for(2 * n_traj, threads, [&](std::size_t job) {
        const bool second = job >= n_traj;
        const std::size_t r = second ? job - n_traj : job;
        const Method m = second ? method_b : Method::Exact;
        // Different methods share seeds (common random numbers); identical methods must not.
        const std::uint64_t id = second && !paired ? n_traj + r : r;
        const bool rbm_weight = second && config.rbm_weight;
        Sampler sampler(spec, m, ring, id, config.dynamics);
        auto& w = second ? wb[r] : wa[r];
        w.reserve(n_rec);
        auto record = [&] {
            w.push_back(evaluate_weight(spec, config.observable, sampler.state().q, rbm_weight,
                                        sampler.weight_rng()));
        };
        record();
        for (std::size_t j = 1; j <= steps; ++j) {
            sampler.step();
            if (j % stride == 0) record();
        }
    });

    EnsembleResult result;
    result.method_a = std::string(method_name(Method::Exact));
    result.method_b = std::string(method_name(method_b));
    result.paired = paired;
    result.weak = weak_error_from_samples(wa, wb, times, paired);

    if (config.relative_entropy.enabled) {
        const auto& re = config.relative_entropy;
        std::vector<double> checkpoints = re.checkpoints;
        std::sort(checkpoints.begin(), checkpoints.end());
        std::vector<Method> methods{Method::Exact};
        if (method_b != Method::Exact) methods.push_back(method_b);

        // Job 0 is the long pmmLang reference on its own random streams.
        constexpr std::uint64_t kReferenceTrajectory = 1ull << 40;
        std::vector<ObservableSeries> series(methods.size() + 1);
        std::vector<std::vector<std::size_t>> counts(methods.size() + 1);
        detail::parallel_for(methods.size() + 1, threads, [&](std::size_t job) {
            if (job == 0) {
                series[0] = sample_observables(spec, Method::Exact, ring, kReferenceTrajectory,
                                               re.reference_time, config.burn_in, re.pool_beads,
                                               config.dynamics);
            } else {
                series[job] = sample_observables(spec, methods[job - 1], ring, 0, re.total_time,
                                                 re.burn_in, re.pool_beads, config.dynamics,
                                                 &counts[job], &checkpoints);
            }
        });

        auto curves = [&](const char* name, auto member) {
            const auto& ref_samples = series[0].*member;
            if (ref_samples.empty()) return;
            const Histogram ref = Histogram::of_reference(ref_samples, re.bins);
            for (std::size_t m = 0; m < methods.size(); ++m) {
                const auto& samples = series[m + 1].*member;
                Histogram h(ref.lo, ref.hi, re.bins);
                std::size_t used = 0;
                for (std::size_t c = 0; c < checkpoints.size(); ++c) {
                    const std::size_t upto = std::min(samples.size(), counts[m + 1][c]);
                    for (; used < upto; ++used) h.add(samples[used]);
                    if (h.total == 0.0) continue;
                    result.entropy.push_back({checkpoints[c], std::string(method_name(methods[m])),
                                              name, relative_entropy(h, ref)});
                }
            }
        };
        curves("position_x", &ObservableSeries::position_x);
        curves("pair_distance", &ObservableSeries::pair_distance);
    }
    return result;
}

std::vector<StrongErrorCurve> run_strong_error(const ExperimentConfig& config, unsigned threads) {
    std::vector<StrongErrorCurve> out;
    for (double dt : config.strong_error.dts) {
        SystemSpec spec = config.system;
        spec.dt = dt;
        const std::size_t steps = steps_for(config.strong_error.total_time, dt);
        auto r = coupled_run(spec, steps, config.strong_error.replicas, 1, threads);
        out.push_back({dt, std::move(r.times), std::move(r.strong_error)});
    }
    return out;
}

std::vector<RejectionRow> run_rejection_table(const ExperimentConfig& config, unsigned threads) {
    struct Job {
        double dt;
        std::size_t np;
        Method method;
        std::size_t p;
    };
    if (!config.system.potential.is_mixed_family())
        throw ConfigError("potential.kind: rejection-table needs the mixed potential");
    std::vector<Job> jobs;
    for (double dt : config.rejection_table.dts)
        for (std::size_t np : config.rejection_table.particles)
            for (Method m : config.rejection_table.methods) {
                if (!method_uses_split(m))
                    throw ConfigError("rejection_table.methods: only splitting methods have rejections");
                if (!method_uses_rbm(m)) {
                    jobs.push_back({dt, np, m, np});
                    continue;
                }
                for (std::size_t p : config.rejection_table.batch_sizes)
                    if (p >= 2 && p <= np && np % p == 0) jobs.push_back({dt, np, m, p});
            }

    std::vector<RejectionRow> rows(jobs.size());
    detail::parallel_for(jobs.size(), threads, [&](std::size_t i) {
        const Job& job = jobs[i];
        SystemSpec spec = config.system;
        spec.dt = job.dt;
        spec.n_particles = job.np;
        spec.batch_size = job.p;
        if (!config.alpha_explicit) spec.alpha = default_alpha(job.np);
        Sampler sampler(spec, job.method, 0, config.dynamics);
        const std::size_t steps = spec.steps();
        for (std::size_t j = 0; j < steps; ++j) sampler.step();
        RejectionRow& row = rows[i];
        row.dt = job.dt;
        row.n_particles = job.np;
        row.method = std::string(method_name(job.method));
        row.batch_size = job.p;
        row.tests = sampler.metropolis_tests();
        row.rejections = sampler.rejections();
        row.rate = row.tests ? static_cast<double>(row.rejections) / static_cast<double>(row.tests)
                             : 0.0;
    });
    return rows;
}

std::vector<SpectrumReport> run_spectrum_check(const ExperimentConfig& config) {
    std::vector<SpectrumReport> out;
    const SystemSpec& spec = config.system;
    for (std::size_t n : config.spectrum.n_beads) {
        RingOperator ring(n, spec.mass, spec.beta, spec.alpha);
        SpectrumReport rep;
        rep.n_beads = n;
        rep.eigenvalues = ring.eigenvalues();
        std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());
        rep.stiffness_condition = ring.stiffness_condition();
        rep.frequency_condition = ring.frequency_condition();

        const std::size_t d = 3;
        Rng rng = make_rng(spec.seed, n, Stream::Init);
        std::vector<double> b(n * d), x1(n * d), x2(n * d), back(n * d), half(n * d), twice(n * d);
        auto rel = [](const std::vector<double>& a, const std::vector<double>& ref) {
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                num += (a[i] - ref[i]) * (a[i] - ref[i]);
                den += ref[i] * ref[i];
            }
            return std::sqrt(num / den);
        };
        for (std::size_t trial = 0; trial < config.spectrum.random_inputs; ++trial) {
            fill_standard_normal(rng, b);
            ring.solve(b, x1, d);
            ring.solve_tridiagonal(b, x2, d);
            ring.apply(x1, back, d);
            ring.sqrt_inverse_apply(b, half, d);
            ring.sqrt_inverse_apply(half, twice, d);
            rep.max_solve_discrepancy = std::max(rep.max_solve_discrepancy, rel(x2, x1));
            rep.max_inverse_residual = std::max(rep.max_inverse_residual, rel(back, b));
            rep.max_sqrt_discrepancy = std::max(rep.max_sqrt_discrepancy, rel(twice, x1));
        }
        out.push_back(std::move(rep));
    }
    return out;
}

// ---- output ---------------------------------------------------------------

namespace {

std::ostream& num(std::ostream& out, double x) {
    if (std::isnan(x)) return out << "nan";
    std::ostringstream s;
    s << std::setprecision(12) << x;
    return out << s.str();
}

Json opt(const std::optional<double>& x) {
    if (!x || std::isnan(*x)) return nullptr;
    return *x;
}

Json real(double x) {
    if (std::isnan(x) || std::isinf(x)) return nullptr;
    return x;
}

Json base_summary(const ExperimentConfig& c, const std::string& command) {
    Json j;
    j["schema"] = "rbpimd.summary.v1";
    j["command"] = command;
    j["preset"] = c.preset;
    j["seed"] = c.system.seed;
    j["method"] = std::string(method_name(c.method));
    j["mean"] = nullptr;
    j["std_err"] = nullptr;
    j["ac_time"] = nullptr;
    j["eff_variance"] = nullptr;
    j["rejection_rate"] = nullptr;
    j["pair_evals_per_step"] = nullptr;
    j["wall_ms_per_step"] = nullptr;
    return j;
}

void attach_config(Json& j, const ExperimentConfig& c) {
    Json cfg = Json::object();
    for (const auto& [k, v] : c.entries()) cfg[k] = v;
    j["config"] = cfg;
}

}  // namespace

void write_time_average_header(std::ostream& out) {
    out << "# schema=rbpimd.timeseries.v1\n";
    out << "t,running_average,instantaneous_weight,acceptance_flag,pair_evals,wall_ms\n";
}

void write_time_average_row(std::ostream& out, const TimeAverageRow& row) {
    num(out, row.t) << ',';
    num(out, row.running_average) << ',';
    num(out, row.weight) << ',';
    if (row.accepted >= 0) out << row.accepted;
    out << ',' << row.pair_evals << ',';
    num(out, row.wall_ms) << '\n';
}

void write_error_table_csv(std::ostream& out, const ErrorTableResult& r) {
    out << "# schema=rbpimd.error_table.v1\n";
    out << "# reference_dt=";
    num(out, r.reference_dt) << " reference_mean=";
    num(out, r.reference_mean) << '\n';
    out << "dt,method,batch_size,mean,std_err,rel_error,pair_evals_per_step,wall_ms_per_step\n";
    for (const auto& row : r.rows) {
        num(out, row.dt) << ',' << row.method << ',' << row.batch_size << ',';
        num(out, row.mean) << ',';
        num(out, row.std_err) << ',';
        num(out, row.rel_error) << ',';
        num(out, row.pair_evals_per_step) << ',';
        if (row.wall_ms_per_step) num(out, *row.wall_ms_per_step);
        out << '\n';
    }
}

void write_weak_error_csv(std::ostream& out, const EnsembleResult& r) {
    out << "# schema=rbpimd.weak_error.v1\n";
    out << "t,mean_exact,mean_method,difference,std_err\n";
    for (const auto& p : r.weak) {
        num(out, p.t) << ',';
        num(out, p.mean_a) << ',';
        num(out, p.mean_b) << ',';
        num(out, p.diff) << ',';
        num(out, p.std_err) << '\n';
    }
}

void write_relative_entropy_csv(std::ostream& out, const EnsembleResult& r) {
    out << "# schema=rbpimd.relative_entropy.v1\n";
    out << "t,method,observable,relative_entropy\n";
    for (const auto& row : r.entropy) {
        num(out, row.t) << ',' << row.method << ',' << row.observable << ',';
        num(out, row.value) << '\n';
    }
}

void write_strong_error_csv(std::ostream& out, const std::vector<StrongErrorCurve>& r) {
    out << "# schema=rbpimd.strong_error.v1\n";
    out << "dt,t,strong_error\n";
    for (const auto& c : r)
        for (std::size_t i = 0; i < c.times.size(); ++i) {
            num(out, c.dt) << ',';
            num(out, c.times[i]) << ',';
            num(out, c.error[i]) << '\n';
        }
}

void write_rejection_table_csv(std::ostream& out, const std::vector<RejectionRow>& r) {
    out << "# schema=rbpimd.rejection_table.v1\n";
    out << "dt,n_particles,method,batch_size,tests,rejections,rejection_rate\n";
    for (const auto& row : r) {
        num(out, row.dt) << ',' << row.n_particles << ',' << row.method << ',' << row.batch_size
                         << ',' << row.tests << ',' << row.rejections << ',';
        num(out, row.rate) << '\n';
    }
}

void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumReport>& r) {
    out << "# schema=rbpimd.spectrum.v1\n";
    out << "n_beads,index,eigenvalue\n";
    for (const auto& rep : r)
        for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
            out << rep.n_beads << ',' << i << ',';
            num(out, rep.eigenvalues[i]) << '\n';
        }
}

std::string summary_json(const ExperimentConfig& c, const RunSummary& s) {
    Json j = base_summary(c, "run");
    j["method"] = s.method;
    j["mean"] = real(s.mean);
    j["std_err"] = real(s.std_err);
    j["ac_time"] = real(s.ac_time);
    j["eff_variance"] = real(s.eff_variance);
    j["rejection_rate"] = opt(s.rejection_rate);
    j["pair_evals_per_step"] = s.pair_evals_per_step;
    j["wall_ms_per_step"] = opt(s.wall_ms_per_step);
    j["observable"] = s.observable;
    j["rbm_weight"] = s.rbm_weight;
    j["steps"] = s.steps;
    j["samples"] = s.samples;
    attach_config(j, c);
    return j.dump(2);
}

std::string summary_json(const ExperimentConfig& c, const ErrorTableResult& r) {
    Json j = base_summary(c, "error-table");
    j["mean"] = real(r.reference_mean);
    j["std_err"] = real(r.reference_std_err);
    j["reference_dt"] = r.reference_dt;
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"dt", row.dt},
                        {"method", row.method},
                        {"batch_size", row.batch_size},
                        {"mean", real(row.mean)},
                        {"rel_error", real(row.rel_error)}});
    j["rows"] = rows;
    j["warnings"] = r.warnings;
    attach_config(j, c);
    return j.dump(2);
}

std::string summary_json(const ExperimentConfig& c, const EnsembleResult& r) {
    Json j = base_summary(c, "ensemble");
    j["paired"] = r.paired;
    double max_abs = 0.0;
    double mean_level = 0.0;
    for (const auto& p : r.weak) {
        max_abs = std::max(max_abs, std::abs(p.diff));
        mean_level += p.mean_a;
    }
    if (!r.weak.empty()) {
        mean_level /= static_cast<double>(r.weak.size());
        j["mean"] = real(r.weak.back().mean_a);
    }
    j["weak_error_max_abs"] = max_abs;
    j["ensemble_mean_level"] = real(mean_level);
    Json ent = Json::object();
    for (const auto& row : r.entropy)
        ent[row.method + "/" + row.observable] = real(row.value);  // last checkpoint wins
    j["relative_entropy_final"] = ent;
    attach_config(j, c);
    return j.dump(2);
}

std::string summary_json(const ExperimentConfig& c, const std::vector<StrongErrorCurve>& r) {
    Json j = base_summary(c, "strong-error");
    Json fin = Json::array();
    for (const auto& curve : r)
        fin.push_back({{"dt", curve.dt},
                       {"t", curve.times.empty() ? 0.0 : curve.times.back()},
                       {"strong_error", curve.error.empty() ? 0.0 : curve.error.back()}});
    j["final"] = fin;
    attach_config(j, c);
    return j.dump(2);
}

std::string summary_json(const ExperimentConfig& c, const std::vector<RejectionRow>& r) {
    Json j = base_summary(c, "rejection-table");
    Json rows = Json::array();
    for (const auto& row : r)
        rows.push_back({{"dt", row.dt},
                        {"n_particles", row.n_particles},
                        {"method", row.method},
                        {"batch_size", row.batch_size},
                        {"rejection_rate", row.rate}});
    j["rows"] = rows;
    attach_config(j, c);
    return j.dump(2);
}

std::string summary_json(const ExperimentConfig& c, const std::vector<SpectrumReport>& r) {
    Json j = base_summary(c, "spectrum-check");
    Json rows = Json::array();
    for (const auto& rep : r)
        rows.push_back({{"n_beads", rep.n_beads},
                        {"stiffness_condition", rep.stiffness_condition},
                        {"frequency_condition", rep.frequency_condition},
                        {"max_solve_discrepancy", rep.max_solve_discrepancy},
                        {"max_inverse_residual", rep.max_inverse_residual},
                        {"max_sqrt_discrepancy", rep.max_sqrt_discrepancy}});
    j["operators"] = rows;
    attach_config(j, c);
    return j.dump(2);
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"run",          "error-table",     "ensemble",
                                                "strong-error", "rejection-table", "spectrum-check"};
    return names;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_output(path);
    out << text << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string run_command(const ExperimentConfig& config, const std::string& command,
                        const std::filesystem::path& out_dir, unsigned threads) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());

    std::string summary;
    if (command == "run") {
        auto csv = open_output(out_dir / "timeseries.csv");
        write_time_average_header(csv);
        auto result = run_time_average(config, [&](const TimeAverageRow& row) {
            write_time_average_row(csv, row);
        });
        if (!csv) throw IoError("failed writing timeseries.csv");
        if (config.output_snapshot) {
            save_snapshot(out_dir / "final_state.rbpq", result.final_state.q,
                          &result.final_state.v);
            save_snapshot_csv(out_dir / "final_state.csv", result.final_state.q);
        }
        summary = summary_json(config, result.summary);
    } else if (command == "error-table") {
        const auto r = run_error_table(config, threads);
        auto csv = open_output(out_dir / "error_table.csv");
        write_error_table_csv(csv, r);
        summary = summary_json(config, r);
    } else if (command == "ensemble") {
        const auto r = run_ensemble(config, threads);
        auto weak = open_output(out_dir / "weak_error.csv");
        write_weak_error_csv(weak, r);
        auto ent = open_output(out_dir / "relative_entropy.csv");
        write_relative_entropy_csv(ent, r);
        summary = summary_json(config, r);
    } else if (command == "strong-error") {
        const auto r = run_strong_error(config, threads);
        auto csv = open_output(out_dir / "strong_error.csv");
        write_strong_error_csv(csv, r);
        summary = summary_json(config, r);
    } else if (command == "rejection-table") {
        const auto r = run_rejection_table(config, threads);
        auto csv = open_output(out_dir / "rejection_table.csv");
        write_rejection_table_csv(csv, r);
        summary = summary_json(config, r);
    } else if (command == "spectrum-check") {
        const auto r = run_spectrum_check(config);
        auto csv = open_output(out_dir / "spectrum.csv");
        write_spectrum_csv(csv, r);
        summary = summary_json(config, r);
    } else {
        throw InvalidArgument("unknown command '" + command + "'");
    }
    write_text(out_dir / "summary.json", summary);
    return summary;
}

}  // namespace rbpimd
