#include "streamsift/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/special_functions/digamma.hpp>

#include "streamsift/errors.hpp"

namespace streamsift {

namespace {

void validate_probs(std::span<const double> probs, const char* what) {
    double total = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0)
            throw ValidationError(std::string(what) + ": entries must be finite and non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > kSumTolerance)
        throw ValidationError(std::string(what) + ": entries sum to " + std::to_string(total) + ", not 1");
}

}  // namespace

Categorical::Categorical(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) throw ValidationError("Categorical: need at least 2 classes");
    validate_probs(probs_, "Categorical");
}

Categorical Categorical::from_masses(std::vector<double> masses) {
    double total = 0.0;
    for (double m : masses) {
        if (!std::isfinite(m) || m < 0.0) throw ValidationError("Categorical: masses must be finite and non-negative");
        total += m;
    }
    if (total <= 0.0) throw ValidationError("Categorical: masses sum to zero");
    for (double& m : masses) m /= total;
    return Categorical(std::move(masses));
}

std::size_t Categorical::argmax() const noexcept {
    return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

JointCategorical::JointCategorical(std::size_t rows, std::size_t cols, std::vector<double> probs)
    : rows_(rows), cols_(cols), probs_(std::move(probs)) {
    if (rows_ < 2 || cols_ < 2) throw ValidationError("JointCategorical: need at least 2 classes per axis");
    if (probs_.size() != rows_ * cols_) throw ValidationError("JointCategorical: size does not match shape");
    validate_probs(probs_, "JointCategorical");
}

JointCategorical JointCategorical::product(const Categorical& row, const Categorical& col) {
    std::vector<double> probs(row.size() * col.size());
    for (std::size_t r = 0; r < row.size(); ++r)
        for (std::size_t c = 0; c < col.size(); ++c) probs[r * col.size() + c] = row[r] * col[c];
    return JointCategorical(row.size(), col.size(), std::move(probs));
}

Categorical JointCategorical::row_marginal() const {
    std::vector<double> m(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) m[r] += probs_[r * cols_ + c];
    return Categorical::from_masses(std::move(m));
}

Categorical JointCategorical::col_marginal() const {
    std::vector<double> m(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) m[c] += probs_[r * cols_ + c];
    return Categorical::from_masses(std::move(m));
}

double kernels::entropy(std::span<const double> p) noexcept {
    double h = 0.0;
    for (double v : p)
        if (v > kZeroProbability) h -= v * std::log(v);
    return h;
}

double entropy(const Categorical& p) {
    const double h = kernels::entropy(p.probs());
    return std::clamp(h, 0.0, std::log(static_cast<double>(p.size())));
}

double kl_divergence(const Categorical& p, const Categorical& q) {
    if (p.size() != q.size()) throw ValidationError("kl_divergence: class counts differ");
    double kl = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        if (p[c] <= kZeroProbability) continue;
        if (q[c] <= 0.0) throw DomainError("kl_divergence: q has zero mass where p is positive");
        kl += p[c] * std::log(p[c] / q[c]);
    }
    return std::max(0.0, kl);
}

double dirichlet_kl(std::span<const double> alpha_post, std::span<const double> alpha_prior) {
    if (alpha_post.size() != alpha_prior.size() || alpha_post.empty())
        throw ValidationError("dirichlet_kl: dimension mismatch");
    for (std::size_t i = 0; i < alpha_post.size(); ++i)
        if (!(alpha_post[i] > 0.0) || !(alpha_prior[i] > 0.0))
            throw DomainError("dirichlet_kl: concentrations must be positive");

    const double post_total = std::accumulate(alpha_post.begin(), alpha_post.end(), 0.0);
    const double prior_total = std::accumulate(alpha_prior.begin(), alpha_prior.end(), 0.0);
    const double psi_total = boost::math::digamma(post_total);

    double kl = std::lgamma(post_total) - std::lgamma(prior_total);
    for (std::size_t i = 0; i < alpha_post.size(); ++i) {
        kl += std::lgamma(alpha_prior[i]) - std::lgamma(alpha_post[i]);
        kl += (alpha_post[i] - alpha_prior[i]) * (boost::math::digamma(alpha_post[i]) - psi_total);
    }
    return std::max(0.0, kl);
}

double mutual_information(const JointCategorical& joint) {
    const double mi = kernels::entropy(joint.row_marginal().probs()) + kernels::entropy(joint.col_marginal().probs()) -
                      kernels::entropy(joint.flat());
    return std::max(0.0, mi);
}

}  // namespace streamsift
