#pragma once

// Marginal maximum likelihood for the spike-and-slab weight and hierarchical
// dimension priors.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sbayes/distributions.hpp"

namespace sbayes {

// L(alpha) = sum_i log((1 - alpha) phi(x_i) + alpha g(x_i)) - sum_i log phi(x_i).
class MarginalLikelihood {
public:
    MarginalLikelihood(std::span<const double> x, SlabSpec slab);

    std::size_t n() const { return log_r_.size(); }
    // log(g(x_i) / phi(x_i)); beta_i = r_i - 1 > -1.
    std::span<const double> log_ratios() const { return log_r_; }
    double log_likelihood(double alpha) const;
    // dL/dalpha = sum_i beta_i / (1 + alpha beta_i); strictly decreasing.
    double score(double alpha) const;

private:
    std::vector<double> log_r_;
};

struct MmleResult {
    double alpha;
    double log_likelihood;
    bool at_lower = false;  // score <= 0 on the whole interval
    bool at_upper = false;  // score >= 0 on the whole interval; statistically degenerate
};

// argmax of L over [lower, upper]; lower defaults to 1/n.
MmleResult mmle_alpha(const MarginalLikelihood& ml, std::optional<double> lower = std::nullopt,
                      double upper = 1.0);

// Normalized log pi_n(k), k = 0..n, for alpha ~ Beta(a, b), |S| | alpha ~ Bin(n, alpha).
std::vector<double> beta_binomial_dim_prior(std::size_t n, double a, double b);

// Smallest D with pi(k) <= D pi(k - 1) for all k >= 1, if D < 1.
std::optional<double> exp_decrease_check(std::span<const double> dim_log_weights);

}  // namespace sbayes
