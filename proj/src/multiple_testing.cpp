#include "sbayes/multiple_testing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "sbayes/empirical_bayes.hpp"
#include "sbayes/parallel.hpp"

namespace sbayes {

namespace {

// Posterior dimension mass at the truncation point that counts as negligible.
constexpr double kTruncationMass = 1e-13;

double logistic_complement(double logit)
{
    // 1 / (1 + e^logit), written to stay accurate for large |logit|.
    if (logit > 0.0) {
        const double e = std::exp(-logit);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(logit));
}

std::vector<double> product_l_values(std::span<const double> log_r, double alpha)
{
    std::vector<double> l(log_r.size());
    if (alpha == 0.0) {
        std::fill(l.begin(), l.end(), 1.0);
        return l;
    }
    if (alpha == 1.0) return l;
    const double prior_logit = std::log(alpha) - std::log1p(-alpha);
    for (std::size_t i = 0; i < log_r.size(); ++i) l[i] = logistic_complement(prior_logit + log_r[i]);
    return l;
}

// Grows k_max until the posterior mass on |S| = k_max is negligible.
std::size_t adaptive_k_max(std::span<const double> log_r, std::span<const double> lw, std::size_t start)
{
    const std::size_t n = log_r.size();
    std::size_t k = std::min(n, std::max<std::size_t>(start, 1));
    for (;;) {
        if (k == n) return k;
        const auto e = log_elementary_symmetric(log_r, k);
        std::vector<double> terms(k + 1);
        for (std::size_t j = 0; j <= k; ++j)
            terms[j] = lw[j] - log_binomial(static_cast<double>(n), static_cast<double>(j)) + e[j];
        const double z = log_sum_exp(terms);
        if (std::exp(terms[k] - z) < kTruncationMass) return k;
        k = std::min(n, 2 * k);
    }
}

double sample_slab(const SlabSpec& slab, Rng& rng)
{
    if (slab.kind() == SlabSpec::Kind::Laplace) {
        const double mag = std::exponential_distribution<double>(slab.scale())(rng);
        return uniform01(rng) < 0.5 ? -mag : mag;
    }
    return slab.scale() * std::tan(std::numbers::pi * (uniform01(rng) - 0.5));
}

}  // namespace

LossReport losses(std::span<const std::uint8_t> decisions, std::span<const double> theta)
{
    if (decisions.size() != theta.size()) throw std::domain_error("losses: length mismatch");
    LossReport r;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const bool signal = theta[i] != 0.0;
        const bool reject = decisions[i] != 0;
        r.n_signals += signal;
        r.n_discoveries += reject;
        r.n_fp += reject && !signal;
        r.n_fn += !reject && signal;
    }
    r.fdp = static_cast<double>(r.n_fp) / static_cast<double>(std::max<std::size_t>(1, r.n_discoveries));
    r.fnp = static_cast<double>(r.n_fn) / static_cast<double>(std::max<std::size_t>(1, r.n_signals));
    return r;
}

std::vector<double> l_values(std::span<const double> x, const LValueSpec& spec)
{
    for (double xi : x)
        if (!std::isfinite(xi)) throw std::domain_error("l_values: non-finite observation");
    if (x.empty()) return {};
    switch (spec.source) {
    case PriorSource::FixedAlpha: {
        const SasPrior prior(spec.alpha, spec.slab);
        std::vector<double> l(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) l[i] = l_value(x[i], prior);
        return l;
    }
    case PriorSource::Mmle: {
        const MarginalLikelihood ml(x, spec.slab);
        return product_l_values(ml.log_ratios(), mmle_alpha(ml).alpha);
    }
    case PriorSource::BetaBinomial: {
        const std::size_t n = x.size();
        const double a = spec.beta_a.value_or(1.0);
        const double b = spec.beta_b.value_or(static_cast<double>(n) + 1.0);
        const SubsetSelectionPrior prior(beta_binomial_dim_prior(n, a, b), spec.slab);
        std::vector<double> log_r(n);
        std::size_t large = 0;
        const double universal = std::sqrt(2.0 * std::log(static_cast<double>(std::max<std::size_t>(n, 2))));
        for (std::size_t i = 0; i < n; ++i) {
            log_r[i] = log_slab_ratio(x[i], spec.slab);
            large += std::abs(x[i]) > universal;
        }
        const std::size_t k = adaptive_k_max(log_r, prior.dim_log_weights(), default_k_max(prior) + 2 * large);
        return subset_l_values_from_log_ratios(log_r, prior.dim_log_weights(), k);
    }
    }
    throw std::domain_error("l_values: unknown prior source");
}

DecisionVector threshold_l_values(std::span<const double> l, double t)
{
    if (!(t > 0.0 && t < 1.0)) throw std::domain_error("l-value procedure: t outside (0,1)");
    DecisionVector d(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) d[i] = l[i] <= t;
    return d;
}

DecisionVector lvalue_procedure(std::span<const double> x, const LValueSpec& spec, double t)
{
    if (!(t > 0.0 && t < 1.0)) throw std::domain_error("l-value procedure: t outside (0,1)");
    return threshold_l_values(l_values(x, spec), t);
}

double q_value(double x_i, const SasPrior& prior)
{
    if (!std::isfinite(x_i)) throw std::domain_error("q_value: non-finite observation");
    const double alpha = prior.alpha();
    if (alpha == 0.0) return 1.0;
    const double ax = std::abs(x_i);
    const double null_tail = (1.0 - alpha) * 2.0 * normal_survival(ax);
    const double slab_tail = alpha * 2.0 * marginal_g_survival(ax, prior.slab());
    return null_tail / (null_tail + slab_tail);
}

DecisionVector bh_from_pvalues(std::span<const double> p, double level)
{
    if (!(level > 0.0 && level < 1.0)) throw std::domain_error("bh_procedure: level outside (0,1)");
    const std::size_t n = p.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::size_t k_hat = 0;
    for (std::size_t k = 1; k <= n; ++k)
        if (p[order[k - 1]] <= static_cast<double>(k) * level / static_cast<double>(n)) k_hat = k;
    DecisionVector d(n, 0);
    for (std::size_t k = 0; k < k_hat; ++k) d[order[k]] = 1;
    return d;
}

DecisionVector bh_procedure(std::span<const double> x, double level, const NoiseModel& noise)
{
    std::vector<double> p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = std::min(1.0, 2.0 * noise.survival(std::abs(x[i])));
    return bh_from_pvalues(p, level);
}

DecisionVector oracle_procedure(std::span<const double> x, long long n, long long s, const NoiseModel& noise)
{
    const double a = oracle_threshold(n, s, noise);
    DecisionVector d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = std::abs(x[i]) > a;
    return d;
}

double lambda_boundary(std::span<const double> b, const NoiseModel& noise)
{
    if (b.empty()) throw std::domain_error("lambda_boundary: empty b vector");
    double total = 0.0;
    for (double bj : b) total += noise.survival(bj);
    return total / static_cast<double>(b.size());
}

KappaTau kappa_tau(double r, double beta, long long n)
{
    if (!(r >= beta)) throw std::domain_error("kappa_tau: requires r >= beta");
    if (!(beta > 0.0) || n < 2) throw std::domain_error("kappa_tau: requires beta > 0 and n >= 2");
    const double sr = std::sqrt(r);
    const double sk = 0.5 * (sr - beta / sr);
    return {sk * sk, (sr - sk) * std::sqrt(2.0 * std::log(static_cast<double>(n)))};
}

// ---------------------------------------------------------------------------

void validate(const SignalConfig& config)
{
    if (config.s < 1 || config.s >= config.n) throw std::domain_error("signal config: requires n > s >= 1");
    if (static_cast<long long>(config.b.size()) != config.s)
        throw std::domain_error("signal config: b must have one entry per signal");
    const double a = oracle_threshold(config.n, config.s, config.noise);
    for (double bj : config.b)
        if (!(a + bj > 0.0)) throw std::domain_error("signal config: a* + b_j must be positive");
}

SignalDraw draw_signal(const SignalConfig& config, Rng& rng)
{
    const std::size_t n = static_cast<std::size_t>(config.n);
    const std::size_t s = static_cast<std::size_t>(config.s);
    const double a = oracle_threshold(config.n, config.s, config.noise);
    SignalDraw d{std::vector<double>(n, 0.0), std::vector<double>(n)};
    std::vector<std::size_t> support(s);
    if (config.random_positions)
        support = random_subset(n, s, rng);
    else
        std::iota(support.begin(), support.end(), std::size_t{0});
    for (std::size_t j = 0; j < s; ++j) {
        const double sign = config.random_signs && uniform01(rng) < 0.5 ? -1.0 : 1.0;
        d.theta[support[j]] = sign * (a + config.b[j]);
    }
    for (std::size_t i = 0; i < n; ++i) d.x[i] = d.theta[i] + config.noise.sample(rng);
    return d;
}

DecisionVector apply_procedure(const ProcedureSpec& proc, std::span<const double> x, const SignalConfig& config)
{
    switch (proc.kind) {
    case ProcedureKind::Oracle:
        return oracle_procedure(x, config.n, config.s, config.noise);
    case ProcedureKind::LValue:
        if (config.noise.kind() != NoiseModel::Kind::Gaussian)
            throw std::domain_error("l-value procedures assume Gaussian noise");
        return lvalue_procedure(x, proc.lvalue, proc.t);
    case ProcedureKind::BH:
        return bh_procedure(x, proc.level, config.noise);
    case ProcedureKind::NeverReject:
        return DecisionVector(x.size(), 0);
    }
    throw std::domain_error("unknown procedure");
}

RiskReport risk_mc(const SignalConfig& config, const ProcedureSpec& proc, long replicates, std::uint64_t seed,
                   unsigned workers)
{
    validate(config);
    if (replicates < 1) throw std::domain_error("risk_mc: replicates must be >= 1");
    struct Rep {
        double fdp, fnp, lc;
    };
    const auto reps = parallel_map(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        Rng rng = derive_stream(seed, r);
        const SignalDraw draw = draw_signal(config, rng);
        const LossReport loss = losses(apply_procedure(proc, draw.x, config), draw.theta);
        return Rep{loss.fdp, loss.fnp,
                   static_cast<double>(loss.classification_loss()) / static_cast<double>(config.s)};
    });
    std::vector<double> fdp, fnp, sum, lc;
    for (const Rep& r : reps) {
        fdp.push_back(r.fdp);
        fnp.push_back(r.fnp);
        sum.push_back(r.fdp + r.fnp);
        lc.push_back(r.lc);
    }
    return {summarize(fdp, seed), summarize(fnp, seed), summarize(sum, seed), summarize(lc, seed)};
}

BayesFdrReport bayes_fdr_mc(long long n, const SasPrior& prior, double t, long replicates, std::uint64_t seed,
                            unsigned workers)
{
    if (n < 1) throw std::domain_error("bayes_fdr_mc: n must be >= 1");
    if (replicates < 1) throw std::domain_error("bayes_fdr_mc: replicates must be >= 1");
    if (!(t > 0.0 && t < 1.0)) throw std::domain_error("bayes_fdr_mc: t outside (0,1)");
    LValueSpec spec;
    spec.source = PriorSource::FixedAlpha;
    spec.alpha = prior.alpha();
    spec.slab = prior.slab();
    const auto reps = parallel_map(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        Rng rng = derive_stream(seed, r);
        std::vector<double> theta(static_cast<std::size_t>(n), 0.0), x(theta.size());
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (uniform01(rng) < prior.alpha()) theta[i] = sample_slab(prior.slab(), rng);
            x[i] = theta[i] + standard_normal(rng);
        }
        const LossReport loss = losses(lvalue_procedure(x, spec, t), theta);
        return std::pair{loss.fdp, loss.fnp};
    });
    std::vector<double> fdp, fnp;
    for (const auto& [a, b] : reps) {
        fdp.push_back(a);
        fnp.push_back(b);
    }
    return {summarize(fdp, seed), summarize(fnp, seed)};
}

// ---------------------------------------------------------------------------

BlockSample block_prior_sample(long long n, long long s, double b, const NoiseModel& noise, Rng& rng)
{
    if (s < 1 || s >= n) throw std::domain_error("block_prior_sample: requires n > s >= 1");
    const double a = oracle_threshold(n, s, noise) + b;
    BlockSample out;
    out.block_size = static_cast<std::size_t>(n / s);
    out.theta.assign(static_cast<std::size_t>(n), 0.0);
    out.x.resize(out.theta.size());
    out.positions.resize(static_cast<std::size_t>(s));
    std::uniform_int_distribution<std::size_t> pick(0, out.block_size - 1);
    for (std::size_t j = 0; j < out.positions.size(); ++j) {
        out.positions[j] = pick(rng);
        out.theta[j * out.block_size + out.positions[j]] = a;
    }
    for (std::size_t i = 0; i < out.x.size(); ++i) out.x[i] = out.theta[i] + noise.sample(rng);
    return out;
}

std::vector<double> block_posterior_weights(std::span<const double> x, std::size_t block_size, std::size_t blocks,
                                            double a, const NoiseModel& noise)
{
    if (block_size * blocks > x.size()) throw std::domain_error("block_posterior_weights: blocks exceed data");
    std::vector<double> w(block_size * blocks);
    std::vector<double> log_h(block_size);
    for (std::size_t j = 0; j < blocks; ++j) {
        const std::size_t off = j * block_size;
        for (std::size_t i = 0; i < block_size; ++i)
            log_h[i] = noise.log_density(x[off + i] - a) - noise.log_density(x[off + i]);
        const double z = log_sum_exp(log_h);
        for (std::size_t i = 0; i < block_size; ++i) w[off + i] = std::exp(log_h[i] - z);
    }
    return w;
}

double rho_upper_limit(long long n, long long s, const NoiseModel& noise, double kappa)
{
    const double a = oracle_threshold(n, s, noise);
    const double delta = boundary_window(n, s, kappa);
    return static_cast<double>(n) / (2.0 * static_cast<double>(s)) * noise.survival(a - delta) - 1.0;
}

LowerBoundReport bayes_lower_bound_mrho(long long n, long long s, double b, double rho, long replicates,
                                        std::uint64_t seed, const NoiseModel& noise, unsigned workers)
{
    if (!(rho >= 1.0)) throw std::domain_error("bayes_lower_bound_mrho: rho must be >= 1");
    if (replicates < 1) throw std::domain_error("bayes_lower_bound_mrho: replicates must be >= 1");
    LowerBoundReport report;
    const double upper = rho_upper_limit(n, s, noise, default_window_exponent(noise));
    if (rho > upper)
        report.warnings.push_back("rho = " + std::to_string(rho) + " lies above the admissible window upper end " +
                                  std::to_string(upper));
    const double a = oracle_threshold(n, s, noise) + b;
    const double cut = 1.0 / (1.0 + rho);  // l > rho / (1 + rho)  <=>  w < 1 / (1 + rho)
    const auto counts = parallel_map(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        Rng rng = derive_stream(seed, r);
        const BlockSample sample = block_prior_sample(n, s, b, noise, rng);
        const auto w = block_posterior_weights(sample.x, sample.block_size, sample.positions.size(), a, noise);
        std::size_t missed = 0;
        for (std::size_t j = 0; j < sample.positions.size(); ++j)
            missed += w[j * sample.block_size + sample.positions[j]] < cut;
        return static_cast<double>(missed) / static_cast<double>(s);
    });
    report.m_rho_over_s = summarize(counts, seed);
    return report;
}

}  // namespace sbayes
