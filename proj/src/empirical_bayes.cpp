#include "sbayes/empirical_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbayes {

namespace {

constexpr double kAlphaTol = 1e-12;
constexpr int kMaxIters = 200;

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace

MarginalLikelihood::MarginalLikelihood(std::span<const double> x, SlabSpec slab)
{
    if (x.empty()) throw std::domain_error("MarginalLikelihood: no observations");
    log_r_.reserve(x.size());
    for (double xi : x) log_r_.push_back(log_slab_ratio(xi, slab));
}

double MarginalLikelihood::log_likelihood(double alpha) const
{
    double total = 0.0;
    for (double lr : log_r_) {
        if (lr > 0.0)
            total += lr + std::log(alpha + (1.0 - alpha) * std::exp(-lr));
        else
            total += std::log1p(alpha * std::expm1(lr));
    }
    return total;
}

double MarginalLikelihood::score(double alpha) const
{
    double total = 0.0;
    for (double lr : log_r_) {
        if (lr > 0.0) {
            const double inv = std::exp(-lr);
            total += -std::expm1(-lr) / (alpha + (1.0 - alpha) * inv);
        } else {
            const double beta = std::expm1(lr);
            total += beta / (1.0 + alpha * beta);
        }
    }
    return total;
}

MmleResult mmle_alpha(const MarginalLikelihood& ml, std::optional<double> lower, double upper)
{
    double lo = lower.value_or(1.0 / static_cast<double>(ml.n()));
    double hi = upper;
    if (!(lo > 0.0 && lo <= hi && hi <= 1.0)) throw std::domain_error("mmle_alpha: need 0 < lower <= upper <= 1");

    const auto ratios = ml.log_ratios();
    if (std::all_of(ratios.begin(), ratios.end(), [](double lr) { return lr == 0.0; })) {
        const double mid = 0.5 * (lo + hi);
        return {mid, ml.log_likelihood(mid)};
    }
    if (ml.score(lo) <= 0.0) return {lo, ml.log_likelihood(lo), true, false};
    if (ml.score(hi) >= 0.0) return {hi, ml.log_likelihood(hi), false, true};

    for (int it = 0; it < kMaxIters && hi - lo > kAlphaTol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double s = ml.score(mid);
        if (s == 0.0) {
            lo = hi = mid;
            break;
        }
        (s > 0.0 ? lo : hi) = mid;
    }
    const double alpha = 0.5 * (lo + hi);
    return {alpha, ml.log_likelihood(alpha)};
}

std::vector<double> beta_binomial_dim_prior(std::size_t n, double a, double b)
{
    if (n < 1) throw std::domain_error("beta_binomial_dim_prior: n must be >= 1");
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta_binomial_dim_prior: a and b must be > 0");
    const double nn = static_cast<double>(n);
    const double base = log_beta(a, b);
    std::vector<double> lw(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        lw[k] = log_binomial(nn, kk) + log_beta(a + kk, b + nn - kk) - base;
    }
    const double z = log_sum_exp(lw);
    for (double& w : lw) w -= z;
    return lw;
}

std::optional<double> exp_decrease_check(std::span<const double> dim_log_weights)
{
    double worst = -INFINITY;
    for (std::size_t k = 1; k < dim_log_weights.size(); ++k) {
        const double prev = dim_log_weights[k - 1];
        const double cur = dim_log_weights[k];
        if (cur == -INFINITY) continue;
        if (prev == -INFINITY) return std::nullopt;
        worst = std::max(worst, cur - prev);
    }
    if (worst >= 0.0) return std::nullopt;
    return std::exp(worst);
}

}  // namespace sbayes
