#pragma once

// Multiple-testing procedures, their losses, Monte Carlo risk estimation and
// the block-prior Bayes lower bound.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbayes/distributions.hpp"
#include "sbayes/monte_carlo.hpp"
#include "sbayes/random.hpp"
#include "sbayes/sas_posterior.hpp"

namespace sbayes {

// decisions[i] == 1 rejects the i-th null hypothesis.
using DecisionVector = std::vector<std::uint8_t>;

struct LossReport {
    std::size_t n_fp = 0;
    std::size_t n_fn = 0;
    std::size_t n_discoveries = 0;
    std::size_t n_signals = 0;
    double fdp = 0.0;
    double fnp = 0.0;

    std::size_t n_tp() const { return n_discoveries - n_fp; }
    std::size_t classification_loss() const { return n_fp + n_fn; }
};

LossReport losses(std::span<const std::uint8_t> decisions, std::span<const double> theta);

enum class PriorSource { FixedAlpha, Mmle, BetaBinomial };

struct LValueSpec {
    PriorSource source = PriorSource::Mmle;
    double alpha = 0.0;  // FixedAlpha only
    SlabSpec slab = SlabSpec::laplace(1.0);
    // BetaBinomial only; defaults a = 1, b = n + 1.
    std::optional<double> beta_a;
    std::optional<double> beta_b;
};

// l_i = Pi[theta_i = 0 | X] under the prior selected by `spec`.
std::vector<double> l_values(std::span<const double> x, const LValueSpec& spec);

// phi_i = 1{l_i <= t}, t in (0, 1).
DecisionVector lvalue_procedure(std::span<const double> x, const LValueSpec& spec, double t);
DecisionVector threshold_l_values(std::span<const double> l, double t);

// Pi[theta = 0 | |X| >= |x_i|] under the product spike-and-slab prior.
double q_value(double x_i, const SasPrior& prior);

// Step-up rule on two-sided p-values 2 F-bar(|x_i|).
DecisionVector bh_procedure(std::span<const double> x, double level, const NoiseModel& noise);
DecisionVector bh_from_pvalues(std::span<const double> p, double level);

// phi_i = 1{|x_i| > a*_n}.
DecisionVector oracle_procedure(std::span<const double> x, long long n, long long s, const NoiseModel& noise);

// s^-1 sum_j F-bar(b_j).
double lambda_boundary(std::span<const double> b, const NoiseModel& noise);

struct KappaTau {
    double kappa;
    double tau;
};

// sqrt(kappa) = (sqrt(r) - beta / sqrt(r)) / 2, tau = (sqrt(r) - sqrt(kappa)) sqrt(2 log n).
KappaTau kappa_tau(double r, double beta, long long n);

struct SignalConfig {
    long long n = 0;
    long long s = 0;
    std::vector<double> b;  // one offset per signal, length s
    NoiseModel noise = NoiseModel::gaussian();
    bool random_signs = true;      // Rademacher signs; otherwise all positive
    bool random_positions = true;  // uniform support; otherwise the first s coordinates
};

// Throws std::domain_error unless s < n, b has s entries and a*_n + b_j > 0.
void validate(const SignalConfig& config);

// theta with |theta_i| = a*_n + b_j on the support and x = theta + noise.
struct SignalDraw {
    std::vector<double> theta;
    std::vector<double> x;
};
SignalDraw draw_signal(const SignalConfig& config, Rng& rng);

enum class ProcedureKind { Oracle, LValue, BH, NeverReject };

struct ProcedureSpec {
    ProcedureKind kind = ProcedureKind::Oracle;
    LValueSpec lvalue;  // LValue only
    double t = 0.5;     // LValue threshold
    double level = 0.1; // BH level
};

DecisionVector apply_procedure(const ProcedureSpec& proc, std::span<const double> x, const SignalConfig& config);

struct RiskReport {
    RiskEstimate fdr;
    RiskEstimate fnr;
    RiskEstimate risk;            // FDR + FNR, per replicate
    RiskEstimate classification;  // L_C / s
};

// Replicate i uses derive_stream(seed, i); the report does not depend on `workers`.
RiskReport risk_mc(const SignalConfig& config, const ProcedureSpec& proc, long replicates, std::uint64_t seed,
                   unsigned workers = 1);

// Bayesian FDR and FNR of the fixed-alpha l-value procedure with theta drawn
// from the prior itself.
struct BayesFdrReport {
    RiskEstimate fdr;
    RiskEstimate fnr;
};
BayesFdrReport bayes_fdr_mc(long long n, const SasPrior& prior, double t, long replicates, std::uint64_t seed,
                            unsigned workers = 1);

// floor(n/s) s coordinates in s consecutive blocks, one signal of size
// a*_n + b per block at a uniform position; the remainder stays zero.
struct BlockSample {
    std::vector<double> theta;
    std::vector<double> x;
    std::size_t block_size = 0;
    std::vector<std::size_t> positions;  // signal index within each block
};
BlockSample block_prior_sample(long long n, long long s, double b, const NoiseModel& noise, Rng& rng);

// Exact block-prior posterior signal probabilities w_i, normalized within each block.
std::vector<double> block_posterior_weights(std::span<const double> x, std::size_t block_size, std::size_t blocks,
                                            double a, const NoiseModel& noise);

// Upper end (n / 2s) F-bar(a* - delta_n) - 1 of the admissible rho window.
double rho_upper_limit(long long n, long long s, const NoiseModel& noise, double kappa);

struct LowerBoundReport {
    RiskEstimate m_rho_over_s;
    std::vector<std::string> warnings;
};

// Monte Carlo M_rho / s = s^-1 sum_i P[theta_i != 0, l_i > rho / (1 + rho)].
LowerBoundReport bayes_lower_bound_mrho(long long n, long long s, double b, double rho, long replicates,
                                        std::uint64_t seed, const NoiseModel& noise = NoiseModel::gaussian(),
                                        unsigned workers = 1);

}  // namespace sbayes
