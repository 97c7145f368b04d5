#include "sbayes/conjugate_sequence.hpp"

#include <cmath>
#include <stdexcept>

#include "sbayes/distributions.hpp"
#include "sbayes/parallel.hpp"
#include "sbayes/random.hpp"

namespace sbayes {

SeriesPrior::SeriesPrior(double smoothness, std::size_t truncation) : smoothness_(smoothness), truncation_(truncation)
{
    if (!(smoothness_ > 0.0)) throw std::domain_error("SeriesPrior: smoothness must be > 0");
    if (truncation_ < 1) throw std::domain_error("SeriesPrior: truncation must be >= 1");
}

double SeriesPrior::variance(std::size_t k) const
{
    return std::pow(static_cast<double>(k), -1.0 - 2.0 * smoothness_);
}

ConjugatePosterior posterior_moments(std::span<const double> x, const SeriesPrior& prior, long long n,
                                     double alpha_temper)
{
    if (x.size() != prior.truncation()) throw std::domain_error("posterior_moments: need one observation per frequency");
    if (n < 1) throw std::domain_error("posterior_moments: n must be >= 1");
    if (!(alpha_temper > 0.0 && alpha_temper <= 1.0))
        throw std::domain_error("posterior_moments: alpha_temper outside (0,1]");
    const double na = static_cast<double>(n) * alpha_temper;
    ConjugatePosterior post{std::vector<double>(x.size()), std::vector<double>(x.size()), alpha_temper, n};
    for (std::size_t k = 1; k <= x.size(); ++k) {
        const double v = 1.0 / (na + 1.0 / prior.variance(k));
        post.variance[k - 1] = v;
        post.mean[k - 1] = na * x[k - 1] * v;
    }
    return post;
}

RiskTerms risk_terms(std::span<const double> theta0, const SeriesPrior& prior, long long n)
{
    if (n < 1) throw std::domain_error("risk_terms: n must be >= 1");
    const double nn = static_cast<double>(n);
    RiskTerms t{0.0, 0.0};
    for (std::size_t k = 1; k <= prior.truncation(); ++k) {
        const double prec = 1.0 / prior.variance(k);
        const double th = k <= theta0.size() ? theta0[k - 1] : 0.0;
        const double denom = (nn + prec) * (nn + prec);
        t.term_a += 1.0 / (nn + prec);
        t.term_b += (prec * prec * th * th + nn) / denom;
    }
    for (std::size_t k = prior.truncation() + 1; k <= theta0.size(); ++k) t.term_b += theta0[k - 1] * theta0[k - 1];
    return t;
}

RiskTerms power_law_risk_terms(double beta, const SeriesPrior& prior, long long n)
{
    if (!(beta > 0.0)) throw std::domain_error("power_law_risk_terms: beta must be > 0");
    const std::size_t K = prior.truncation();
    std::vector<double> theta0(K);
    for (std::size_t k = 1; k <= K; ++k) theta0[k - 1] = std::pow(static_cast<double>(k), -0.5 - beta);
    RiskTerms t = risk_terms(theta0, prior, n);
    t.term_b += std::pow(static_cast<double>(K) + 0.5, -2.0 * beta) / (2.0 * beta);
    return t;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) throw std::domain_error("least_squares_slope: need >= 2 paired points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::domain_error("least_squares_slope: x values are all equal");
    return sxy / sxx;
}

ContractionCurve contraction_curve(double alpha_prior, double beta, std::span<const long long> n_grid)
{
    ContractionCurve curve;
    std::vector<double> lx, ly;
    for (long long n : n_grid) {
        const SeriesPrior prior(alpha_prior, static_cast<std::size_t>(n));
        const RiskTerms t = power_law_risk_terms(beta, prior, n);
        curve.points.push_back({n, t});
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(t.total()));
    }
    curve.slope = least_squares_slope(lx, ly);
    return curve;
}

// ---------------------------------------------------------------------------

void FunctionalSpec::validate() const
{
    if (!(beta > 0.0) || !(mu > 0.0) || !(gamma > 0.0))
        throw std::domain_error("FunctionalSpec: exponents must be > 0");
}

double FunctionalSpec::truth(std::size_t k) const { return std::pow(static_cast<double>(k), -0.5 - beta); }

double FunctionalSpec::representer(std::size_t k) const { return std::pow(static_cast<double>(k), -0.5 - mu); }

double FunctionalSpec::prior_variance(std::size_t k) const
{
    return std::pow(static_cast<double>(k), -1.0 - 2.0 * gamma);
}

FunctionalPosterior functional_posterior(std::span<const double> x, const FunctionalSpec& spec, long long n,
                                         double alpha_temper)
{
    spec.validate();
    if (n < 1) throw std::domain_error("functional_posterior: n must be >= 1");
    if (!(alpha_temper > 0.0 && alpha_temper <= 1.0))
        throw std::domain_error("functional_posterior: alpha_temper outside (0,1]");
    const double na = static_cast<double>(n) * alpha_temper;
    double center = 0.0, var = 0.0;
    for (std::size_t k = 1; k <= x.size(); ++k) {
        const double lam = spec.prior_variance(k);
        const double a = spec.representer(k);
        center += na * lam / (1.0 + na * lam) * a * x[k - 1];
        var += lam / (1.0 + na * lam) * a * a;
    }
    return {center, std::sqrt(var)};
}

double functional_truth(const FunctionalSpec& spec, std::size_t truncation)
{
    double psi = 0.0;
    for (std::size_t k = 1; k <= truncation; ++k) psi += spec.representer(k) * spec.truth(k);
    return psi;
}

Interval shift_rescale_interval(double center, double lo, double hi, double alpha_temper)
{
    if (lo > hi) throw std::domain_error("shift_rescale_interval: lo > hi");
    if (!(alpha_temper > 0.0 && alpha_temper <= 1.0))
        throw std::domain_error("shift_rescale_interval: alpha_temper outside (0,1]");
    const double r = std::sqrt(alpha_temper);
    return {r * (lo - center) + center, r * (hi - center) + center};
}

std::vector<CoveragePoint> coverage_mc(const FunctionalSpec& spec, std::span<const long long> n_grid,
                                       double alpha_exponent, double delta, long replicates, std::uint64_t seed,
                                       unsigned workers)
{
    spec.validate();
    if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("coverage_mc: delta outside (0,1)");
    if (!(alpha_exponent >= 0.0)) throw std::domain_error("coverage_mc: alpha exponent must be >= 0");
    if (replicates < 1) throw std::domain_error("coverage_mc: replicates must be >= 1");
    const double z = normal_upper_quantile(0.5 * delta);
    std::vector<CoveragePoint> out;
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        const long long n = n_grid[g];
        if (n < 1) throw std::domain_error("coverage_mc: n must be >= 1");
        const std::size_t K = spec.truncation ? spec.truncation : static_cast<std::size_t>(n);
        const double alpha = std::pow(static_cast<double>(n), -alpha_exponent);
        const double noise_sd = 1.0 / std::sqrt(static_cast<double>(n));

        std::vector<double> f0(K);
        for (std::size_t k = 1; k <= K; ++k) f0[k - 1] = spec.truth(k);
        const double sd = functional_posterior(f0, spec, n, alpha).sd;
        const double target = functional_truth(spec, K);

        const auto hits = parallel_map(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
            Rng rng = derive_stream(seed ^ mix64(static_cast<std::uint64_t>(g)), r);
            std::vector<double> xr(K);
            for (std::size_t k = 0; k < K; ++k) xr[k] = f0[k] + noise_sd * standard_normal(rng);
            const double c = functional_posterior(xr, spec, n, alpha).center;
            const Interval j = shift_rescale_interval(c, c - z * sd, c + z * sd, alpha);
            return j.contains(target) ? 1.0 : 0.0;
        });
        const double len = 2.0 * z * sd * std::sqrt(alpha);
        out.push_back({n, alpha, summarize(hits, seed), len});
    }
    return out;
}

}  // namespace sbayes
