#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace streamsift {

/// Absolute tolerance for "sums to one" checks, shared by every module.
inline constexpr double kSumTolerance = 1e-9;
/// Probabilities at or below this are treated as exact zeros in entropy and KL terms.
inline constexpr double kZeroProbability = 1e-12;

/// A normalized probability vector over C >= 2 classes.
class Categorical {
public:
    /// Throws ValidationError unless probs is a valid distribution.
    explicit Categorical(std::vector<double> probs);

    /// Normalizes non-negative masses; throws ValidationError when they sum to zero.
    static Categorical from_masses(std::vector<double> masses);

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t c) const { return probs_[c]; }
    std::span<const double> probs() const noexcept { return probs_; }
    std::size_t argmax() const noexcept;

private:
    std::vector<double> probs_;
};

/// Joint distribution over (y, y*) stored row-major: rows index y, columns index y*.
class JointCategorical {
public:
    JointCategorical(std::size_t rows, std::size_t cols, std::vector<double> probs);

    static JointCategorical product(const Categorical& row, const Categorical& col);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return probs_[r * cols_ + c]; }
    std::span<const double> flat() const noexcept { return probs_; }

    Categorical row_marginal() const;
    Categorical col_marginal() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> probs_;
};

/// Shannon entropy in nats, with 0 ln 0 = 0.
double entropy(const Categorical& p);

/// KL(p || q) in nats. Throws DomainError when q has no mass where p does.
double kl_divergence(const Categorical& p, const Categorical& q);

/// Closed-form KL(Dir(alpha_post) || Dir(alpha_prior)).
double dirichlet_kl(std::span<const double> alpha_post, std::span<const double> alpha_prior);

/// H(y) + H(y*) - H(y, y*), clamped at zero.
double mutual_information(const JointCategorical& joint);

namespace kernels {

// Unchecked variants for estimator inner loops. Inputs are assumed normalized.

double entropy(std::span<const double> p) noexcept;

}  // namespace kernels

}  // namespace streamsift
