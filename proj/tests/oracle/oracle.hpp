// Brute-force references used only by tests: dense linear algebra for the ring
// operator, enumeration of batch divisions and naive double-loop sums.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

#include "rbpimd/potentials.hpp"
#include "rbpimd/types.hpp"

namespace oracle {

// Dense (L + alpha I) built entry by entry from the spring chain.
struct DenseRing {
    Eigen::MatrixXd l;      // L without alpha
    Eigen::MatrixXd l_reg;  // L + alpha I
    double beta_n;

    DenseRing(int n, double mass, double beta, double alpha) : beta_n(beta / n) {
        l = Eigen::MatrixXd::Zero(n, n);
        const double k = mass / (beta_n * beta_n);
        for (int i = 0; i < n; ++i) {
            const int next = (i + 1) % n;
            // One spring (k/2)|q_i - q_next|^2 per bond.
            l(i, i) += k;
            l(next, next) += k;
            l(i, next) -= k;
            l(next, i) -= k;
        }
        l_reg = l + alpha * Eigen::MatrixXd::Identity(n, n);
    }

    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
        return es.eigenvalues();
    }
    Eigen::MatrixXd inverse() const { return l_reg.inverse(); }
    Eigen::MatrixXd sqrt_inverse() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l_reg);
        return es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
               es.eigenvectors().transpose();
    }
    // Covariance of one coordinate path under exp(-beta_N (q^T L q / 2 + alpha |q|^2 / 2)).
    Eigen::MatrixXd covariance() const { return inverse() / beta_n; }
};

// Row-major N x d block as an Eigen matrix.
inline Eigen::MatrixXd as_matrix(const std::vector<double>& x, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = x[static_cast<std::size_t>(i * cols + j)];
    return m;
}

inline std::vector<double> as_vector(const Eigen::MatrixXd& m) {
    std::vector<double> out(static_cast<std::size_t>(m.size()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    return out;
}

// Every partition of {0..n-1} into unordered blocks of size p.
inline void enumerate_divisions(std::vector<int>& remaining, int p,
                                std::vector<std::vector<int>>& current,
                                std::vector<std::vector<std::vector<int>>>& out) {
    if (remaining.empty()) {
        out.push_back(current);
        return;
    }
    // The smallest remaining index anchors the next block; choose its p-1 partners.
    const int anchor = remaining.front();
    std::vector<int> rest(remaining.begin() + 1, remaining.end());
    std::vector<int> pick;
    std::function<void(std::size_t)> choose = [&](std::size_t start) {
        if (static_cast<int>(pick.size()) == p - 1) {
            std::vector<int> block{anchor};
            block.insert(block.end(), pick.begin(), pick.end());
            std::vector<int> left;
            for (int x : rest)
                if (std::find(pick.begin(), pick.end(), x) == pick.end()) left.push_back(x);
            current.push_back(block);
            enumerate_divisions(left, p, current, out);
            current.pop_back();
            return;
        }
        for (std::size_t i = start; i < rest.size(); ++i) {
            pick.push_back(rest[i]);
            choose(i + 1);
            pick.pop_back();
        }
    };
    choose(0);
}

inline std::vector<std::vector<std::vector<int>>> all_divisions(int n, int p) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    std::vector<std::vector<int>> current;
    std::vector<std::vector<std::vector<int>>> out;
    enumerate_divisions(all, p, current, out);
    return out;
}

// Central finite difference of phi at r.
inline double numeric_derivative(const rbpimd::PairPotential& v, double r, double h = 1e-6) {
    return (v.value_at(r + h) - v.value_at(r - h)) / (2.0 * h);
}

// Naive double loop over ordered pairs: G_k^i = sum_{j != i} phi'(r) (q^i - q^j)/r.
inline rbpimd::BeadGrid naive_force(const rbpimd::PairPotential& v, const rbpimd::BeadGrid& q) {
    rbpimd::BeadGrid g(q.n_beads(), q.n_particles());
    for (std::size_t k = 0; k < q.n_beads(); ++k)
        for (std::size_t i = 0; i < q.n_particles(); ++i)
            for (std::size_t j = 0; j < q.n_particles(); ++j) {
                if (i == j) continue;
                const rbpimd::Vec3 d = q.at(k, i) - q.at(k, j);
                const double r = rbpimd::norm(d);
                g.add(k, i, d * (v.derivative_at(r) / r));
            }
    return g;
}

// Naive sum over beads and unordered pairs of phi(r).
inline double naive_pair_energy(const rbpimd::PairPotential& v, const rbpimd::BeadGrid& q) {
    double s = 0.0;
    for (std::size_t k = 0; k < q.n_beads(); ++k)
        for (std::size_t i = 0; i < q.n_particles(); ++i)
            for (std::size_t j = i + 1; j < q.n_particles(); ++j)
                s += v.value_at(rbpimd::norm(q.at(k, i) - q.at(k, j)));
    return s;
}

}  // namespace oracle
