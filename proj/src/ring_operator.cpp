#include "rbpimd/ring_operator.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "fftw_lock.hpp"
#include "rbpimd/types.hpp"

namespace rbpimd {

struct RingOperator::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    ~Plans() {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

RingOperator::RingOperator(std::size_t n_beads, double mass, double beta, double alpha)
    : n_beads_(n_beads), mass_(mass), beta_n_(beta / static_cast<double>(n_beads)), alpha_(alpha) {
    if (n_beads < 4 || n_beads % 2 != 0)
        throw InvalidArgument("ring operator: n_beads must be even and >= 4, got " +
                              std::to_string(n_beads));
    if (!(mass > 0.0) || !(beta > 0.0))
        throw InvalidArgument("ring operator: mass and beta must be positive");
    if (!(alpha >= 0.0)) throw InvalidArgument("ring operator: alpha must be non-negative");

    spring_ = mass_ / (beta_n_ * beta_n_);
    const std::size_t n = n_beads_;
    const std::size_t half = n / 2;

    eigenvalues_.reserve(n);
    eigenvalues_.push_back(0.0);
    for (std::size_t k = 1; k < half; ++k) {
        const double lam = frequency_eigenvalue(k);
        eigenvalues_.push_back(lam);
        eigenvalues_.push_back(lam);
    }
    eigenvalues_.push_back(4.0 * spring_);

    inverse_filter_.resize(half + 1);
    inverse_sqrt_filter_.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        const double mu = frequency_eigenvalue(k) + alpha_;
        inverse_filter_[k] = alpha_ > 0.0 ? 1.0 / mu : 0.0;
        inverse_sqrt_filter_[k] = alpha_ > 0.0 ? 1.0 / std::sqrt(mu) : 0.0;
    }

    if (alpha_ > 0.0) {
        // Sherman-Morrison reduction of the cyclic system to a tridiagonal one.
        const double diag = 2.0 * spring_ + alpha_;
        const double off = -spring_;
        tri_gamma_ = -diag;
        std::vector<double> bb(n, diag);
        bb[0] = diag - tri_gamma_;
        bb[n - 1] = diag - off * off / tri_gamma_;

        tri_cprime_.assign(n, 0.0);
        tri_denom_.assign(n, 0.0);
        tri_denom_[0] = bb[0];
        for (std::size_t j = 1; j < n; ++j) {
            tri_cprime_[j] = off / tri_denom_[j - 1];
            tri_denom_[j] = bb[j] - off * tri_cprime_[j];
        }

        std::vector<double> u(n, 0.0);
        u[0] = tri_gamma_;
        u[n - 1] = off;
        tri_correction_.assign(n, 0.0);
        tri_correction_[0] = u[0] / tri_denom_[0];
        for (std::size_t j = 1; j < n; ++j)
            tri_correction_[j] = (u[j] - off * tri_correction_[j - 1]) / tri_denom_[j];
        for (std::size_t j = n - 1; j-- > 0;)
            tri_correction_[j] -= tri_cprime_[j + 1] * tri_correction_[j + 1];
    }
}

RingOperator::~RingOperator() = default;

double RingOperator::frequency_eigenvalue(std::size_t k) const {
    const double s = std::sin(std::numbers::pi * static_cast<double>(k) /
                              static_cast<double>(n_beads_));
    return 4.0 * spring_ * s * s;
}

double RingOperator::stiffness_condition() const {
    const double s = std::sin(std::numbers::pi / static_cast<double>(n_beads_));
    return 1.0 / (s * s);
}

double RingOperator::frequency_condition() const { return std::sqrt(stiffness_condition()); }

void RingOperator::require_regularized(const char* what) const {
    if (!(alpha_ > 0.0))
        throw InvalidArgument(std::string("ring operator: ") + what +
                              " requires alpha > 0 (L alone is singular)");
}

void RingOperator::check_shape(std::size_t in, std::size_t out, std::size_t n_cols) const {
    const std::size_t expected = n_beads_ * n_cols;
    if (in != expected || out != expected)
        throw InvalidArgument("ring operator: expected " + std::to_string(n_beads_) + " x " +
                              std::to_string(n_cols) + " block, got sizes " +
                              std::to_string(in) + " / " + std::to_string(out));
}

const RingOperator::Plans& RingOperator::plans_for(std::size_t n_cols) const {
    std::lock_guard lock(plan_mutex_);
    auto it = plans_.find(n_cols);
    if (it != plans_.end()) return *it->second;

    const int n = static_cast<int>(n_beads_);
    const int howmany = static_cast<int>(n_cols);
    const int stride = howmany;
    std::vector<double> real(n_beads_ * n_cols);
    std::vector<std::complex<double>> spec((n_beads_ / 2 + 1) * n_cols);
    auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());

    auto plans = std::make_unique<Plans>();
    {
        std::lock_guard planner(detail::fftw_planner_mutex());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        plans->forward = fftw_plan_many_dft_r2c(1, &n, howmany, real.data(), nullptr, stride, 1,
                                                cplx, nullptr, stride, 1, flags);
        plans->backward = fftw_plan_many_dft_c2r(1, &n, howmany, cplx, nullptr, stride, 1,
                                                 real.data(), nullptr, stride, 1,
                                                 flags | FFTW_DESTROY_INPUT);
    }
    if (!plans->forward || !plans->backward) throw Error("ring operator: FFT planning failed");
    return *plans_.emplace(n_cols, std::move(plans)).first->second;
}

void RingOperator::circulant_filter(std::span<const double> x, std::span<double> out,
                                    std::size_t n_cols, const std::vector<double>& filter) const {
    check_shape(x.size(), out.size(), n_cols);
    if (n_cols == 0) return;
    const Plans& plans = plans_for(n_cols);
    const std::size_t half = n_beads_ / 2;
    std::vector<std::complex<double>> spec((half + 1) * n_cols);
    auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());

    fftw_execute_dft_r2c(plans.forward, const_cast<double*>(x.data()), cplx);
    const double norm = 1.0 / static_cast<double>(n_beads_);
    for (std::size_t k = 0; k <= half; ++k) {
        const double f = filter[k] * norm;
        std::complex<double>* row = &spec[k * n_cols];
        for (std::size_t c = 0; c < n_cols; ++c) row[c] *= f;
    }
    fftw_execute_dft_c2r(plans.backward, cplx, out.data());
}

void RingOperator::apply(std::span<const double> x, std::span<double> out,
                         std::size_t n_cols) const {
    check_shape(x.size(), out.size(), n_cols);
    const std::size_t n = n_beads_;
    const double diag = 2.0 * spring_ + alpha_;
    for (std::size_t k = 0; k < n; ++k) {
        const double* cur = &x[k * n_cols];
        const double* prev = &x[((k + n - 1) % n) * n_cols];
        const double* next = &x[((k + 1) % n) * n_cols];
        double* dst = &out[k * n_cols];
        for (std::size_t c = 0; c < n_cols; ++c)
            dst[c] = diag * cur[c] - spring_ * (prev[c] + next[c]);
    }
}

void RingOperator::solve(std::span<const double> b, std::span<double> out,
                         std::size_t n_cols) const {
    require_regularized("solve");
    circulant_filter(b, out, n_cols, inverse_filter_);
}

void RingOperator::solve_tridiagonal(std::span<const double> b, std::span<double> out,
                                     std::size_t n_cols) const {
    require_regularized("solve");
    check_shape(b.size(), out.size(), n_cols);
    const std::size_t n = n_beads_;
    const double off = -spring_;

    // Forward sweep over all columns at once, row by row.
    for (std::size_t c = 0; c < n_cols; ++c) out[c] = b[c] / tri_denom_[0];
    for (std::size_t j = 1; j < n; ++j) {
        const double inv = 1.0 / tri_denom_[j];
        const double* src = &b[j * n_cols];
        const double* prev = &out[(j - 1) * n_cols];
        double* dst = &out[j * n_cols];
        for (std::size_t c = 0; c < n_cols; ++c) dst[c] = (src[c] - off * prev[c]) * inv;
    }
    for (std::size_t j = n - 1; j-- > 0;) {
        const double cp = tri_cprime_[j + 1];
        const double* next = &out[(j + 1) * n_cols];
        double* dst = &out[j * n_cols];
        for (std::size_t c = 0; c < n_cols; ++c) dst[c] -= cp * next[c];
    }

    const auto& z = tri_correction_;
    const double denom = 1.0 + z[0] + off * z[n - 1] / tri_gamma_;
    const double* first = &out[0];
    const double* last = &out[(n - 1) * n_cols];
    std::vector<double> fact(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c)
        fact[c] = (first[c] + off * last[c] / tri_gamma_) / denom;
    for (std::size_t j = 0; j < n; ++j) {
        double* dst = &out[j * n_cols];
        for (std::size_t c = 0; c < n_cols; ++c) dst[c] -= fact[c] * z[j];
    }
}

void RingOperator::sqrt_inverse_apply(std::span<const double> x, std::span<double> out,
                                      std::size_t n_cols) const {
    require_regularized("sqrt_inverse_apply");
    circulant_filter(x, out, n_cols, inverse_sqrt_filter_);
}

void RingOperator::sample_gaussian(Rng& rng, std::span<double> out, std::size_t n_cols) const {
    require_regularized("sample_gaussian");
    std::vector<double> xi(n_beads_ * n_cols);
    fill_standard_normal(rng, xi);
    sqrt_inverse_apply(xi, out, n_cols);
}

// Basis convention (beads j = 1..N, stored in row j-1):
//   mode 0      : 1/sqrt(N)
//   mode 2k-1   : sqrt(2/N) cos(2 pi k j / N)   k = 1..N/2-1
//   mode 2k     : sqrt(2/N) sin(2 pi k j / N)
//   mode N-1    : (-1)^j / sqrt(N)
// With X_k the DFT over rows r = j-1, sum_j x_j e^{-2 pi i k j/N} = e^{-2 pi i k/N} X_k.
void RingOperator::to_modes(std::span<const double> x, std::span<double> out,
                            std::size_t n_cols) const {
    check_shape(x.size(), out.size(), n_cols);
    if (n_cols == 0) return;
    const Plans& plans = plans_for(n_cols);
    const std::size_t n = n_beads_;
    const std::size_t half = n / 2;
    std::vector<std::complex<double>> spec((half + 1) * n_cols);
    fftw_execute_dft_r2c(plans.forward, const_cast<double*>(x.data()),
                         reinterpret_cast<fftw_complex*>(spec.data()));

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    const double pair_scale = std::sqrt(2.0 / static_cast<double>(n));
    for (std::size_t k = 0; k <= half; ++k) {
        const double theta = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        const std::complex<double> phase(std::cos(theta), std::sin(theta));
        for (std::size_t c = 0; c < n_cols; ++c) {
            const std::complex<double> y = phase * spec[k * n_cols + c];
            if (k == 0) {
                out[c] = y.real() * inv_sqrt_n;
            } else if (k == half) {
                out[(n - 1) * n_cols + c] = y.real() * inv_sqrt_n;
            } else {
                out[(2 * k - 1) * n_cols + c] = pair_scale * y.real();
                out[(2 * k) * n_cols + c] = -pair_scale * y.imag();
            }
        }
    }
}

void RingOperator::from_modes(std::span<const double> y, std::span<double> out,
                              std::size_t n_cols) const {
    check_shape(y.size(), out.size(), n_cols);
    if (n_cols == 0) return;
    const Plans& plans = plans_for(n_cols);
    const std::size_t n = n_beads_;
    const std::size_t half = n / 2;
    std::vector<std::complex<double>> spec((half + 1) * n_cols);

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    const double pair_scale = 1.0 / std::sqrt(2.0 * static_cast<double>(n));
    for (std::size_t k = 0; k <= half; ++k) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        const std::complex<double> phase(std::cos(theta), std::sin(theta));
        for (std::size_t c = 0; c < n_cols; ++c) {
            std::complex<double> w;
            if (k == 0)
                w = y[c] * inv_sqrt_n;
            else if (k == half)
                w = y[(n - 1) * n_cols + c] * inv_sqrt_n;
            else
                w = pair_scale * std::complex<double>(y[(2 * k - 1) * n_cols + c],
                                                      -y[(2 * k) * n_cols + c]);
            spec[k * n_cols + c] = phase * w;
        }
    }
    fftw_execute_dft_c2r(plans.backward, reinterpret_cast<fftw_complex*>(spec.data()),
                         out.data());
}

}  // namespace rbpimd
