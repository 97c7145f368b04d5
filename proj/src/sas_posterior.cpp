#include "sbayes/sas_posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace sbayes {

namespace {

constexpr double kWindow = 38.5;
constexpr double kQuadRelTol = 1e-10;
constexpr int kBisectionIters = 200;
constexpr long kRejectionCap = 1'000'000;
// Deflated leave-one-out polynomials whose rounding error can be amplified
// beyond this factor are recomputed from scratch.
constexpr double kMaxAmplification = 1e4;

template <class F>
double integrate_over(F&& f, double a, double b, std::vector<double> breaks)
{
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    double prev = a;
    for (double p : breaks) {
        p = std::clamp(p, a, b);
        if (p > prev) {
            total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, prev, p, 15, kQuadRelTol);
            prev = p;
        }
    }
    return total;
}

std::vector<double> cauchy_breaks(double x, double scale) { return {x, 0.0, -20.0 * scale, 20.0 * scale}; }

// Z ~ N(m, 1) conditioned on Z > 0.
double sample_normal_above_zero(double m, Rng& rng)
{
    if (m >= -30.0) {
        double u = 0.0;
        while (u == 0.0) u = uniform01(rng);
        return m + normal_upper_quantile(u * normal_cdf(m));
    }
    // Exponential-proposal rejection for a standard normal tail beyond a = -m.
    const double a = -m;
    const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (long tries = 0; tries < kRejectionCap; ++tries) {
        double u = 0.0;
        while (u == 0.0) u = uniform01(rng);
        const double z = a - std::log(u) / rate;
        if (uniform01(rng) <= std::exp(-0.5 * (z - rate) * (z - rate))) return m + z;
    }
    throw SamplerError("truncated normal sampler exceeded the proposal cap");
}

double bisect(auto&& positive_at, double lo, double hi)
{
    for (int it = 0; it < kBisectionIters && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (positive_at(mid))
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

SasPrior::SasPrior(double alpha, SlabSpec slab) : alpha_(alpha), slab_(slab)
{
    if (!(alpha_ >= 0.0 && alpha_ <= 1.0)) throw std::domain_error("SasPrior: alpha outside [0,1]");
}

// ---------------------------------------------------------------------------

SlabPosterior::SlabPosterior(double x, SlabSpec slab) : x_(x), slab_(slab), log_g_(log_marginal_g(x, slab))
{
    const double l = slab_.scale();
    if (slab_.kind() == SlabSpec::Kind::Laplace) {
        const double mu = x - l;
        const double ml = x + l;
        const double log_wu = -l * x + normal_log_cdf(mu);
        const double log_wl = l * x + normal_log_survival(ml);
        upper_prob_ = std::exp(log_wu - log_sum_exp(log_wu, log_wl));
        const double q = 1.0 - upper_prob_;

        const double ru = std::exp(normal_log_pdf(mu) - normal_log_cdf(mu));
        const double eu = mu + ru;
        const double vu = std::max(0.0, 1.0 - mu * ru - ru * ru);
        const double rl = std::exp(normal_log_pdf(ml) - normal_log_survival(ml));
        const double el = ml - rl;
        const double vl = std::max(0.0, 1.0 + ml * rl - rl * rl);

        mean_ = upper_prob_ * eu + q * el;
        const double d = eu - el;
        variance_ = upper_prob_ * vu + q * vl + upper_prob_ * q * d * d;
        return;
    }
    const auto breaks = cauchy_breaks(x, l);
    auto w = [&](double u) { return normal_pdf(x - u) * slab_.density(u); };
    const double m0 = integrate_over(w, x - kWindow, x + kWindow, breaks);
    const double m1 = integrate_over([&](double u) { return u * w(u); }, x - kWindow, x + kWindow, breaks);
    mean_ = m1 / m0;
    const double m2 = integrate_over([&](double u) { return (u - mean_) * (u - mean_) * w(u); }, x - kWindow,
                                     x + kWindow, breaks);
    variance_ = m2 / m0;
}

double SlabPosterior::density(double u) const
{
    return std::exp(normal_log_pdf(x_ - u) + slab_.log_density(u) - log_g_);
}

double SlabPosterior::survival(double t) const
{
    if (slab_.kind() == SlabSpec::Kind::Laplace) {
        const double mu = x_ - slab_.scale();
        const double ml = x_ + slab_.scale();
        if (t >= 0.0) {
            if (upper_prob_ == 0.0) return 0.0;
            return std::exp(std::log(upper_prob_) + normal_log_survival(t - mu) - normal_log_cdf(mu));
        }
        const double below = std::exp(normal_log_cdf(t - ml) - normal_log_cdf(-ml));
        return upper_prob_ + (1.0 - upper_prob_) * (1.0 - below);
    }
    const double hi = x_ + kWindow;
    if (t >= hi) return 0.0;
    const double lo = std::max(t, x_ - kWindow);
    const double mass = integrate_over([&](double u) { return density(u); }, lo, hi, cauchy_breaks(x_, slab_.scale()));
    return std::clamp(mass, 0.0, 1.0);
}

double SlabPosterior::sample(Rng& rng) const
{
    const double l = slab_.scale();
    if (slab_.kind() == SlabSpec::Kind::Laplace) {
        if (uniform01(rng) < upper_prob_) return sample_normal_above_zero(x_ - l, rng);
        return -sample_normal_above_zero(-(x_ + l), rng);
    }
    // Proposal N(x, 1); the Cauchy factor 1 / (1 + (u/l)^2) <= 1 is the acceptance probability.
    for (long tries = 0; tries < kRejectionCap; ++tries) {
        const double u = x_ + standard_normal(rng);
        const double z = u / l;
        if (uniform01(rng) * (1.0 + z * z) <= 1.0) return u;
    }
    throw SamplerError("Cauchy slab rejection sampler exceeded 10^6 proposals");
}

// ---------------------------------------------------------------------------

double posterior_weight(double x, const SasPrior& prior)
{
    if (!std::isfinite(x)) throw std::domain_error("posterior_weight: non-finite x");
    const double alpha = prior.alpha();
    if (alpha == 0.0) return 0.0;
    if (alpha == 1.0) return 1.0;
    const double logit = std::log(alpha) - std::log1p(-alpha) + log_slab_ratio(x, prior.slab());
    return 1.0 / (1.0 + std::exp(-logit));
}

double l_value(double x, const SasPrior& prior) { return 1.0 - posterior_weight(x, prior); }

CoordinatePosterior coordinate_posterior(double x, const SasPrior& prior)
{
    return {x, posterior_weight(x, prior), SlabPosterior(x, prior.slab())};
}

CoordinateMoments coordinate_moments(double x, const SasPrior& prior, double about)
{
    if (!std::isfinite(x) || !std::isfinite(about)) throw std::domain_error("coordinate_moments: non-finite input");
    if (prior.alpha() == 0.0) return {0.0, about * about};
    const double a = posterior_weight(x, prior);
    const SlabPosterior g(x, prior.slab());
    const double shift = g.mean() - about;
    return {a * g.mean(), (1.0 - a) * about * about + a * (g.variance() + shift * shift)};
}

double posterior_median(double x, const SasPrior& prior)
{
    if (!(prior.alpha() > 0.0 && prior.alpha() < 1.0))
        throw std::domain_error("posterior_median: alpha must lie in (0,1)");
    if (!std::isfinite(x)) throw std::domain_error("posterior_median: non-finite x");
    if (x < 0.0) return -posterior_median(-x, prior);
    // For x >= 0 and a symmetric slab at most half the slab mass is negative,
    // so the median is either 0 or positive.
    const double a = posterior_weight(x, prior);
    const SlabPosterior g(x, prior.slab());
    if (a * g.survival(0.0) <= 0.5) return 0.0;
    return bisect([&](double u) { return a * g.survival(u) < 0.5; }, 0.0, x + 40.0);
}

double median_threshold(const SasPrior& prior)
{
    if (!(prior.alpha() > 0.0 && prior.alpha() < 1.0))
        throw std::domain_error("median_threshold: alpha must lie in (0,1)");
    auto above = [&](double x) { return posterior_weight(x, prior) * SlabPosterior(x, prior.slab()).survival(0.0) > 0.5; };
    double hi = 1.0;
    while (!above(hi)) {
        hi *= 2.0;
        if (hi > 1e4) throw std::domain_error("median_threshold: no threshold below 1e4");
    }
    return bisect(above, 0.0, hi);
}

double sample_coordinate(double x, const SasPrior& prior, Rng& rng)
{
    const double a = posterior_weight(x, prior);
    if (a == 0.0) return 0.0;
    if (a < 1.0 && uniform01(rng) >= a) return 0.0;
    return SlabPosterior(x, prior.slab()).sample(rng);
}

double sample_coordinate(const CoordinatePosterior& posterior, Rng& rng)
{
    if (posterior.a == 0.0) return 0.0;
    if (posterior.a < 1.0 && uniform01(rng) >= posterior.a) return 0.0;
    return posterior.slab_component.sample(rng);
}

// ---------------------------------------------------------------------------

SubsetSelectionPrior::SubsetSelectionPrior(std::vector<double> dim_log_weights, SlabSpec slab)
    : log_weights_(std::move(dim_log_weights)), slab_(slab)
{
    if (log_weights_.size() < 2) throw std::domain_error("SubsetSelectionPrior: need weights for k = 0..n, n >= 1");
    bool any = false;
    for (double w : log_weights_) {
        if (std::isnan(w) || w == INFINITY) throw std::domain_error("SubsetSelectionPrior: invalid log weight");
        any = any || std::isfinite(w);
    }
    if (!any) throw std::domain_error("SubsetSelectionPrior: all weights are zero");
}

double SubsetSelectionPrior::expected_dimension() const
{
    const double z = log_sum_exp(log_weights_);
    double mean = 0.0;
    for (std::size_t k = 0; k < log_weights_.size(); ++k)
        mean += static_cast<double>(k) * std::exp(log_weights_[k] - z);
    return mean;
}

std::size_t default_k_max(const SubsetSelectionPrior& prior)
{
    const double k = std::ceil(4.0 * prior.expected_dimension()) + 50.0;
    return std::min(prior.n(), static_cast<std::size_t>(k));
}

std::vector<double> log_elementary_symmetric(std::span<const double> log_r, std::size_t k_max)
{
    std::vector<double> e(k_max + 1, -INFINITY);
    e[0] = 0.0;
    std::size_t filled = 0;
    for (double lr : log_r) {
        filled = std::min(filled + 1, k_max);
        for (std::size_t k = filled; k >= 1; --k) e[k] = log_sum_exp(e[k], e[k - 1] + lr);
    }
    return e;
}

std::vector<double> subset_l_values_from_log_ratios(std::span<const double> log_r,
                                                    std::span<const double> dim_log_weights, std::size_t k_max)
{
    const std::size_t n = log_r.size();
    if (dim_log_weights.size() != n + 1) throw std::domain_error("subset l-values: need n + 1 dimension weights");
    if (k_max < 1) throw std::domain_error("subset l-values: k_max must be >= 1");
    for (double lr : log_r)
        if (std::isnan(lr) || lr == INFINITY) throw std::domain_error("subset l-values: invalid likelihood ratio");
    k_max = std::min(k_max, n);

    // Posterior over supports: pi(|S|) / C(n, |S|) * prod_{i in S} r_i.
    std::vector<double> w(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k)
        w[k] = dim_log_weights[k] - log_binomial(static_cast<double>(n), static_cast<double>(k));

    const std::vector<double> e = log_elementary_symmetric(log_r, k_max);
    std::vector<double> terms(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k) terms[k] = w[k] + e[k];
    const double log_den = log_sum_exp(terms);
    if (!std::isfinite(log_den)) throw std::domain_error("subset l-values: posterior has no mass below k_max");

    const std::size_t k_loo = std::min(k_max, n - 1);
    auto l_from = [&](const std::vector<double>& d) {
        std::vector<double> t(k_loo + 1);
        for (std::size_t k = 0; k <= k_loo; ++k) t[k] = w[k] + d[k];
        return std::min(1.0, std::exp(log_sum_exp(t) - log_den));
    };

    std::vector<double> out(n);
    std::vector<std::size_t> flagged;
    std::vector<double> d(k_loo + 1);
    for (std::size_t i = 0; i < n; ++i) {
        // e_k(r) = e_k(r_{-i}) + r_i e_{k-1}(r_{-i}), solved upward in k.
        d[0] = 0.0;
        double amp = 0.0;
        bool ok = true;
        for (std::size_t k = 1; k <= k_loo && ok; ++k) {
            const double a = e[k];
            const double b = log_r[i] + d[k - 1];
            if (!(b < a)) {
                ok = false;
                break;
            }
            d[k] = a + std::log1p(-std::exp(b - a));
            amp = std::exp(a - d[k]) + std::exp(b - d[k]) * amp;
            ok = amp <= kMaxAmplification;
        }
        if (ok)
            out[i] = l_from(d);
        else
            flagged.push_back(i);
    }
    if (flagged.empty()) return out;

    std::vector<double> rest;
    rest.reserve(n - flagged.size());
    for (std::size_t i = 0, f = 0; i < n; ++i) {
        if (f < flagged.size() && flagged[f] == i)
            ++f;
        else
            rest.push_back(log_r[i]);
    }
    const std::vector<double> base = log_elementary_symmetric(rest, k_loo);
    std::size_t filled_base = std::min(rest.size(), k_loo);
    for (std::size_t i : flagged) {
        d = base;
        std::size_t filled = filled_base;
        for (std::size_t j : flagged) {
            if (j == i) continue;
            filled = std::min(filled + 1, k_loo);
            for (std::size_t k = filled; k >= 1; --k) d[k] = log_sum_exp(d[k], d[k - 1] + log_r[j]);
        }
        out[i] = l_from(d);
    }
    return out;
}

std::vector<double> subset_selection_l_values(std::span<const double> x, const SubsetSelectionPrior& prior,
                                              std::size_t k_max)
{
    if (x.size() != prior.n()) throw std::domain_error("subset_selection_l_values: prior size does not match data");
    std::vector<double> log_r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) throw std::domain_error("subset_selection_l_values: non-finite observation");
        log_r[i] = log_slab_ratio(x[i], prior.slab());
    }
    return subset_l_values_from_log_ratios(log_r, prior.dim_log_weights(), k_max);
}

}  // namespace sbayes
