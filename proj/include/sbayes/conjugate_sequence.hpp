#pragma once

// Conjugate (tempered) posteriors for Gaussian series priors in the sequence
// model X_k = theta_k + n^{-1/2} Z_k, k = 1..K.

#include <cstdint>
#include <span>
#include <vector>

#include "sbayes/monte_carlo.hpp"

namespace sbayes {

// theta_k ~ N(0, k^{-1-2 alpha}) independently for k <= K, zero beyond.
class SeriesPrior {
public:
    SeriesPrior(double smoothness, std::size_t truncation);

    double smoothness() const { return smoothness_; }
    std::size_t truncation() const { return truncation_; }
    // sigma_k^2 for k = 1..K.
    double variance(std::size_t k) const;

private:
    double smoothness_;
    std::size_t truncation_;
};

struct ConjugatePosterior {
    std::vector<double> mean;      // m_k = n alpha X_k v_k
    std::vector<double> variance;  // v_k = 1 / (n alpha + sigma_k^{-2})
    double alpha_temper;
    long long n;
};

ConjugatePosterior posterior_moments(std::span<const double> x, const SeriesPrior& prior, long long n,
                                     double alpha_temper = 1.0);

struct RiskTerms {
    double term_a;  // sum_k E Var(theta_k | X)
    double term_b;  // sum_k E (posterior mean - theta_0k)^2
    double total() const { return term_a + term_b; }
};

// Closed-form expected risk terms for the untempered posterior. theta0 holds
// theta_{0,1..}; entries beyond K add their square to term_b.
RiskTerms risk_terms(std::span<const double> theta0, const SeriesPrior& prior, long long n);

// Risk terms for theta_0k = k^{-1/2-beta}, with the squared tail beyond K
// approximated by the integral (K + 1/2)^{-2 beta} / (2 beta).
RiskTerms power_law_risk_terms(double beta, const SeriesPrior& prior, long long n);

// Ordinary least-squares slope of y on x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

struct ContractionPoint {
    long long n;
    RiskTerms terms;
};

struct ContractionCurve {
    std::vector<ContractionPoint> points;
    double slope;  // of log(term_a + term_b) against log n
};

// K = n at every grid point.
ContractionCurve contraction_curve(double alpha_prior, double beta, std::span<const long long> n_grid);

// Truth f_0k = k^{-1/2-beta}, representer a_k = k^{-1/2-mu}, prior variances
// lambda_k = k^{-1-2 gamma}, k = 1..K.
struct FunctionalSpec {
    double beta = 1.0;
    double mu = 1.0;
    double gamma = 0.25;
    std::size_t truncation = 0;  // 0 means K = n

    void validate() const;
    double truth(std::size_t k) const;
    double representer(std::size_t k) const;
    double prior_variance(std::size_t k) const;
};

struct FunctionalPosterior {
    double center;
    double sd;
};

// Exact posterior of psi(f) = sum_k a_k f_k under the tempered conjugate posterior.
FunctionalPosterior functional_posterior(std::span<const double> x, const FunctionalSpec& spec, long long n,
                                         double alpha_temper);

// psi(f_0) restricted to k <= K.
double functional_truth(const FunctionalSpec& spec, std::size_t truncation);

struct Interval {
    double lo;
    double hi;
    bool contains(double v) const { return lo < v && v <= hi; }
    double length() const { return hi - lo; }
};

// (sqrt(alpha)(lo - c) + c, sqrt(alpha)(hi - c) + c].
Interval shift_rescale_interval(double center, double lo, double hi, double alpha_temper);

struct CoveragePoint {
    long long n;
    double alpha_n;
    RiskEstimate coverage;
    double mean_length;
};

// alpha_n = n^{-alpha_exponent} (0 gives the untempered posterior). The interval
// is the shift-and-rescale version of the central 1 - delta posterior quantile set.
std::vector<CoveragePoint> coverage_mc(const FunctionalSpec& spec, std::span<const long long> n_grid,
                                       double alpha_exponent, double delta, long replicates, std::uint64_t seed,
                                       unsigned workers = 1);

}  // namespace sbayes
