#pragma once

// Exact coordinatewise spike-and-slab posteriors in the sequence model
// X_i = theta_i + eps_i, and exact l-values under subset-selection priors.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "sbayes/distributions.hpp"
#include "sbayes/random.hpp"

namespace sbayes {

class SamplerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// (1 - alpha) delta_0 + alpha * slab, independently per coordinate.
class SasPrior {
public:
    SasPrior(double alpha, SlabSpec slab);

    double alpha() const { return alpha_; }
    const SlabSpec& slab() const { return slab_; }

private:
    double alpha_;
    SlabSpec slab_;
};

// Slab component G_x of the posterior: density phi(x - u) gamma(u) / g(x).
class SlabPosterior {
public:
    SlabPosterior(double x, SlabSpec slab);

    double x() const { return x_; }
    double density(double u) const;
    double mean() const { return mean_; }
    double variance() const { return variance_; }
    // P(U > t) under G_x.
    double survival(double t) const;
    double sample(Rng& rng) const;

private:
    double x_;
    SlabSpec slab_;
    double log_g_;
    double mean_ = 0.0;
    double variance_ = 0.0;
    // Laplace slab only: G_x is a two-piece mixture of N(x - lambda, 1)
    // truncated to (0, inf) and N(x + lambda, 1) truncated to (-inf, 0).
    double upper_prob_ = 0.0;
};

struct CoordinatePosterior {
    double x;
    double a;  // posterior slab weight
    SlabPosterior slab_component;
};

CoordinatePosterior coordinate_posterior(double x, const SasPrior& prior);

// a(x) = alpha g(x) / ((1 - alpha) phi(x) + alpha g(x)).
double posterior_weight(double x, const SasPrior& prior);
// Pi[theta = 0 | x] = 1 - a(x).
double l_value(double x, const SasPrior& prior);

struct CoordinateMoments {
    double mean;
    double second_moment_about;  // E[(theta - about)^2 | x]
};

CoordinateMoments coordinate_moments(double x, const SasPrior& prior, double about);

// Median of (1 - a) delta_0 + a G_x. Requires 0 < alpha < 1.
double posterior_median(double x, const SasPrior& prior);
// Smallest x > 0 at which the posterior median becomes nonzero.
double median_threshold(const SasPrior& prior);

// One draw from the coordinate posterior. Throws SamplerError if the Cauchy
// rejection sampler exceeds 10^6 proposals.
double sample_coordinate(double x, const SasPrior& prior, Rng& rng);
// Same, reusing a precomputed posterior for repeated draws at one x.
double sample_coordinate(const CoordinatePosterior& posterior, Rng& rng);

// Dimension prior pi_n(k), k = 0..n, up to normalization, plus a uniform
// support of the drawn size and iid slab values on it.
class SubsetSelectionPrior {
public:
    SubsetSelectionPrior(std::vector<double> dim_log_weights, SlabSpec slab);

    std::size_t n() const { return log_weights_.size() - 1; }
    std::span<const double> dim_log_weights() const { return log_weights_; }
    const SlabSpec& slab() const { return slab_; }
    // Prior mean of the dimension |S|.
    double expected_dimension() const;

private:
    std::vector<double> log_weights_;
    SlabSpec slab_;
};

// min(n, 4 E|S| + 50).
std::size_t default_k_max(const SubsetSelectionPrior& prior);

// Pi[theta_i = 0 | X] for every i, with the posterior restricted to
// |S| <= k_max. Cost O(n k_max) plus O(|F|^2 k_max) for the coordinates F
// whose leave-one-out polynomials cannot be deflated accurately.
std::vector<double> subset_selection_l_values(std::span<const double> x, const SubsetSelectionPrior& prior,
                                              std::size_t k_max);

// Same computation from log r_i = log(g(x_i) / phi(x_i)) directly.
std::vector<double> subset_l_values_from_log_ratios(std::span<const double> log_r,
                                                    std::span<const double> dim_log_weights, std::size_t k_max);

// log e_k(r), k = 0..k_max, for r given in log scale.
std::vector<double> log_elementary_symmetric(std::span<const double> log_r, std::size_t k_max);

}  // namespace sbayes
