#pragma once

// Mean-field spike-and-slab variational Bayes for Y = X theta + eps,
// eps ~ N(0, I_n), with a dimension prior and Laplace slab.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sbayes/distributions.hpp"

namespace sbayes {

struct RegressionInstance {
    Eigen::MatrixXd design;
    Eigen::VectorXd response;

    void validate() const;
};

// iid N(0, 1) entries from the stream derive_stream(seed, 0).
Eigen::MatrixXd generate_design(long n, long p, std::uint64_t seed);

// Y = X theta0 + eps with eps drawn from derive_stream(seed, 1).
RegressionInstance simulate_regression(Eigen::MatrixXd design, std::span<const double> theta0, std::uint64_t seed);

// pi_p(k) over k = 0..p (log scale, up to normalization), uniform support
// given the size, iid slab values on the support.
class RegressionPrior {
public:
    RegressionPrior(std::vector<double> dim_log_weights, SlabSpec slab);

    std::size_t p() const { return log_weights_.size() - 1; }
    std::span<const double> dim_log_weights() const { return log_weights_; }
    const SlabSpec& slab() const { return slab_; }
    // log pi_p(k) - log C(p, k): log prior mass of one particular support of size k.
    double log_support_weight(std::size_t k) const { return support_weights_[k]; }

private:
    std::vector<double> log_weights_;
    std::vector<double> support_weights_;
    SlabSpec slab_;
};

// Dimension weights from |S| ~ Bin(p, alpha), alpha ~ Beta(1, p^u).
RegressionPrior beta_binomial_regression_prior(std::size_t p, double u, double lambda);

// A1 p^{-A3} pi(s-1) <= pi(s) <= A2 p^{-A4} pi(s-1) for s = 1..p, with
// A1 = A2 = 1 and the tightest A3, A4.
struct DimensionPriorConstants {
    double a1 = 1.0;
    double a2 = 1.0;
    double a3;
    double a4;
    bool satisfied() const { return a4 > 0.0 && a3 >= a4; }
};
DimensionPriorConstants dimension_prior_constants(std::span<const double> dim_log_weights);

// Q = prod_i (1 - gamma_i) delta_0 + gamma_i N(mu_i, sigma_i^2).
struct MeanFieldState {
    Eigen::VectorXd gamma;
    Eigen::VectorXd mu;
    Eigen::VectorXd sigma;
    std::vector<double> elbo_trace;
    int sweeps = 0;
    bool converged = false;

    void validate(std::size_t p) const;
    Eigen::VectorXd mean() const { return gamma.cwiseProduct(mu); }
};

class OptimizationError : public std::runtime_error {
public:
    OptimizationError(const std::string& what, MeanFieldState state)
        : std::runtime_error(what), state_(std::move(state))
    {
    }
    const MeanFieldState& state() const { return state_; }

private:
    MeanFieldState state_;
};

// E_Q log p(Y | theta) + E_Q log(dPi / dQ), all terms in closed form.
double elbo(const MeanFieldState& state, const RegressionInstance& instance, const RegressionPrior& prior);

// Screening, ridge and slab-scale initialization.
MeanFieldState screening_init(const RegressionInstance& instance, const RegressionPrior& prior);

struct CaviOptions {
    int max_sweeps = 500;
    double tol = 1e-8;
};

// Cyclic exact coordinate maximization of the ELBO in ascending coordinate
// order. Throws OptimizationError if the ELBO becomes non-finite.
MeanFieldState cavi_fit(const RegressionInstance& instance, const RegressionPrior& prior,
                        const CaviOptions& options = {}, std::optional<MeanFieldState> init = std::nullopt);

// K(Q, Pi) + E_Q K(P_theta0, P_theta): an upper bound on E K(Q, Pi(. | Y)).
double kl_upper_bound(const MeanFieldState& state, const RegressionInstance& instance, const RegressionPrior& prior,
                      std::span<const double> theta0);

struct OracleResult {
    double log_marginal;
    double log_marginal_se;
    std::vector<double> inclusion;
    std::vector<double> inclusion_se;
    std::vector<double> mean;
    std::vector<double> mean_se;
};

// Exact posterior over all 2^p supports (p <= 12); slab integrals by
// importance sampling from N(theta_hat_S, (rho X_S'X_S)^{-1}). With rho < 1
// the likelihood is tempered.
OracleResult enumeration_oracle(const RegressionInstance& instance, const RegressionPrior& prior,
                                long mc_per_subset, std::uint64_t seed, double rho = 1.0);

}  // namespace sbayes
