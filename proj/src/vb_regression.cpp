#include "sbayes/vb_regression.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "sbayes/empirical_bayes.hpp"
#include "sbayes/random.hpp"

namespace sbayes {

namespace {

constexpr double kGammaMin = 1e-10;
constexpr double kGammaMax = 1.0 - 1e-10;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
const double kHalfLog2PiE = 0.5 * (std::log(2.0 * std::numbers::pi) + 1.0);
// Supports whose upper bound falls this far (in log scale) below the running
// total are skipped by the enumeration oracle.
constexpr double kOraclePruneGap = 40.0;

double expected_abs(double mu, double sigma)
{
    const double t = mu / sigma;
    return 2.0 * sigma * normal_pdf(t) + mu * std::erf(t / std::numbers::sqrt2);
}

double binary_entropy(double g)
{
    double h = 0.0;
    if (g > 0.0) h -= g * std::log(g);
    if (g < 1.0) h -= (1.0 - g) * std::log1p(-g);
    return h;
}

// Distribution of sum_i Bernoulli(gamma_i).
std::vector<double> poisson_binomial(const Eigen::VectorXd& gamma)
{
    std::vector<double> pk(static_cast<std::size_t>(gamma.size()) + 1, 0.0);
    pk[0] = 1.0;
    for (Eigen::Index i = 0; i < gamma.size(); ++i) {
        const double g = gamma[i];
        for (std::size_t k = static_cast<std::size_t>(i) + 1; k >= 1; --k) pk[k] = (1.0 - g) * pk[k] + g * pk[k - 1];
        pk[0] *= 1.0 - g;
    }
    return pk;
}

// Removes one Bernoulli(g) summand from a Poisson-binomial distribution,
// recursing from the end where the division is well conditioned.
std::vector<double> deflate(const std::vector<double>& pk, double g)
{
    const std::size_t m = pk.size() - 1;
    std::vector<double> q(m, 0.0);
    if (m == 0) return q;
    // pk[k] = (1-g) q[k] + g q[k-1]. Each q[k] is taken from whichever term
    // dominates, forward while the first does and backward after that, so the
    // subtraction never cancels more than half the value.
    std::size_t forward = 0;
    for (; forward < m; ++forward) {
        const double rest = pk[forward] - (forward > 0 ? g * q[forward - 1] : 0.0);
        if (rest < 0.5 * pk[forward]) break;
        q[forward] = rest / (1.0 - g);
    }
    if (forward < m) {
        q[m - 1] = pk[m] / g;
        for (std::size_t k = m - 1; k > forward; --k) q[k - 1] = std::max(pk[k] - (1.0 - g) * q[k], 0.0) / g;
    }
    double total = 0.0;
    for (double v : q) total += v;
    for (double& v : q) v /= total;
    return q;
}

std::vector<double> convolve(const std::vector<double>& q, double g)
{
    std::vector<double> pk(q.size() + 1, 0.0);
    for (std::size_t k = 0; k < q.size(); ++k) {
        pk[k] += (1.0 - g) * q[k];
        pk[k + 1] += g * q[k];
    }
    return pk;
}

double expect(const std::vector<double>& pk, const RegressionPrior& prior, std::size_t offset)
{
    double total = 0.0;
    for (std::size_t k = 0; k < pk.size(); ++k) {
        if (pk[k] == 0.0) continue;
        total += pk[k] * prior.log_support_weight(k + offset);
    }
    return total;
}

struct SlabObjective {
    double c, d, lambda;

    double value(double mu, double sigma) const
    {
        return mu * c - 0.5 * d * (mu * mu + sigma * sigma) - lambda * expected_abs(mu, sigma) + std::log(sigma);
    }
};

// Maximizes the jointly concave slab objective by damped Newton steps.
std::pair<double, double> maximize_slab(const SlabObjective& f, double mu, double sigma)
{
    double val = f.value(mu, sigma);
    for (int it = 0; it < 100; ++it) {
        const double t = mu / sigma;
        const double ph = normal_pdf(t);
        const double gm = f.c - f.d * mu - f.lambda * std::erf(t / std::numbers::sqrt2);
        const double gs = -f.d * sigma - 2.0 * f.lambda * ph + 1.0 / sigma;
        const double hmm = -f.d - 2.0 * f.lambda * ph / sigma;
        const double hms = 2.0 * f.lambda * ph * t / sigma;
        const double hss = -f.d - 2.0 * f.lambda * ph * t * t / sigma - 1.0 / (sigma * sigma);
        const double det = hmm * hss - hms * hms;
        double dm = -(hss * gm - hms * gs) / det;
        double ds = -(-hms * gm + hmm * gs) / det;
        if (!(det > 0.0) || !std::isfinite(dm) || !std::isfinite(ds)) {
            // Fall back to a scaled gradient step.
            dm = -gm / hmm;
            ds = -gs / hss;
        }
        double step = 1.0;
        bool moved = false;
        for (int half = 0; half < 60; ++half, step *= 0.5) {
            const double nm = mu + step * dm;
            const double ns = sigma + step * ds;
            if (!(ns > 0.0)) continue;
            const double nv = f.value(nm, ns);
            if (nv >= val) {
                moved = nv > val || (nm == mu && ns == sigma);
                mu = nm;
                sigma = ns;
                val = nv;
                break;
            }
        }
        if (!moved) break;
        if (std::abs(step * dm) <= 1e-13 * (1.0 + std::abs(mu)) && std::abs(step * ds) <= 1e-13 * sigma) break;
    }
    return {mu, sigma};
}

}  // namespace

void RegressionInstance::validate() const
{
    if (design.rows() != response.size() || design.rows() < 1 || design.cols() < 1)
        throw std::domain_error("regression instance: inconsistent dimensions");
    if (!design.allFinite() || !response.allFinite()) throw std::domain_error("regression instance: non-finite entries");
}

Eigen::MatrixXd generate_design(long n, long p, std::uint64_t seed)
{
    if (n < 1 || p < 1) throw std::domain_error("generate_design: n and p must be >= 1");
    Rng rng = derive_stream(seed, 0);
    Eigen::MatrixXd x(n, p);
    for (long j = 0; j < p; ++j)
        for (long i = 0; i < n; ++i) x(i, j) = standard_normal(rng);
    return x;
}

RegressionInstance simulate_regression(Eigen::MatrixXd design, std::span<const double> theta0, std::uint64_t seed)
{
    if (static_cast<std::size_t>(design.cols()) != theta0.size())
        throw std::domain_error("simulate_regression: theta0 length does not match the design");
    Rng rng = derive_stream(seed, 1);
    const Eigen::Map<const Eigen::VectorXd> th(theta0.data(), static_cast<Eigen::Index>(theta0.size()));
    Eigen::VectorXd y = design * th;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += standard_normal(rng);
    return {std::move(design), std::move(y)};
}

RegressionPrior::RegressionPrior(std::vector<double> dim_log_weights, SlabSpec slab)
    : log_weights_(std::move(dim_log_weights)), slab_(slab)
{
    if (log_weights_.size() < 2) throw std::domain_error("RegressionPrior: need weights for k = 0..p, p >= 1");
    const double z = log_sum_exp(log_weights_);
    if (!std::isfinite(z)) throw std::domain_error("RegressionPrior: weights do not normalize");
    const double p = static_cast<double>(log_weights_.size() - 1);
    support_weights_.resize(log_weights_.size());
    for (std::size_t k = 0; k < log_weights_.size(); ++k) {
        log_weights_[k] -= z;
        support_weights_[k] = log_weights_[k] - log_binomial(p, static_cast<double>(k));
    }
}

RegressionPrior beta_binomial_regression_prior(std::size_t p, double u, double lambda)
{
    if (!(u > 0.0)) throw std::domain_error("beta_binomial_regression_prior: u must be > 0");
    return {beta_binomial_dim_prior(p, 1.0, std::pow(static_cast<double>(p), u)), SlabSpec::laplace(lambda)};
}

DimensionPriorConstants dimension_prior_constants(std::span<const double> dim_log_weights)
{
    if (dim_log_weights.size() < 3) throw std::domain_error("dimension_prior_constants: need p >= 2");
    const double log_p = std::log(static_cast<double>(dim_log_weights.size() - 1));
    DimensionPriorConstants c{1.0, 1.0, -INFINITY, INFINITY};
    for (std::size_t s = 1; s < dim_log_weights.size(); ++s) {
        const double r = dim_log_weights[s] - dim_log_weights[s - 1];
        if (!std::isfinite(r)) throw std::domain_error("dimension_prior_constants: weights must be positive");
        c.a3 = std::max(c.a3, -r / log_p);
        c.a4 = std::min(c.a4, -r / log_p);
    }
    return c;
}

void MeanFieldState::validate(std::size_t p) const
{
    const auto np = static_cast<Eigen::Index>(p);
    if (gamma.size() != np || mu.size() != np || sigma.size() != np)
        throw std::domain_error("mean-field state: dimension mismatch");
    for (Eigen::Index i = 0; i < np; ++i) {
        if (!(gamma[i] >= 0.0 && gamma[i] <= 1.0)) throw std::domain_error("mean-field state: gamma outside [0,1]");
        if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i]) || !std::isfinite(mu[i]))
            throw std::domain_error("mean-field state: degenerate slab component");
    }
}

double elbo(const MeanFieldState& state, const RegressionInstance& instance, const RegressionPrior& prior)
{
    instance.validate();
    const auto p = static_cast<std::size_t>(instance.design.cols());
    if (prior.p() != p) throw std::domain_error("elbo: prior dimension does not match the design");
    if (prior.slab().kind() != SlabSpec::Kind::Laplace) throw std::domain_error("elbo: requires a Laplace slab");
    state.validate(p);

    const double lambda = prior.slab().scale();
    const Eigen::VectorXd m = state.mean();
    const Eigen::VectorXd d = instance.design.colwise().squaredNorm().transpose();
    double var_term = 0.0, slab = 0.0, entropy = 0.0;
    for (Eigen::Index j = 0; j < m.size(); ++j) {
        const double g = state.gamma[j];
        const double second = g * (state.mu[j] * state.mu[j] + state.sigma[j] * state.sigma[j]);
        var_term += d[j] * (second - m[j] * m[j]);
        entropy += binary_entropy(g);
        if (g > 0.0) {
            slab += g * (std::log(0.5 * lambda) - lambda * expected_abs(state.mu[j], state.sigma[j]));
            entropy += g * (kHalfLog2PiE + std::log(state.sigma[j]));
        }
    }
    const double n = static_cast<double>(instance.response.size());
    const double fit = (instance.response - instance.design * m).squaredNorm();
    const double loglik = -0.5 * n * kLog2Pi - 0.5 * (fit + var_term);
    return loglik + expect(poisson_binomial(state.gamma), prior, 0) + slab + entropy;
}

MeanFieldState screening_init(const RegressionInstance& instance, const RegressionPrior& prior)
{
    instance.validate();
    const Eigen::MatrixXd& x = instance.design;
    const Eigen::Index n = x.rows(), p = x.cols();
    const double lambda = prior.slab().scale();

    MeanFieldState s;
    const Eigen::VectorXd score = (x.transpose() * instance.response).cwiseAbs();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return score[a] > score[b]; });
    s.gamma.resize(p);
    for (Eigen::Index r = 0; r < p; ++r) {
        const double frac = p > 1 ? static_cast<double>(r) / static_cast<double>(p - 1) : 0.0;
        s.gamma[order[static_cast<std::size_t>(r)]] = 0.5 - 0.45 * frac;
    }

    // Ridge with unit penalty, solved in the smaller of the two dimensions.
    if (n <= p) {
        Eigen::MatrixXd gram = x * x.transpose();
        gram.diagonal().array() += 1.0;
        s.mu = x.transpose() * gram.ldlt().solve(instance.response);
    } else {
        Eigen::MatrixXd gram = x.transpose() * x;
        gram.diagonal().array() += 1.0;
        s.mu = gram.ldlt().solve(x.transpose() * instance.response);
    }
    s.sigma = (x.colwise().squaredNorm().transpose().array() + lambda * lambda).rsqrt();
    return s;
}

MeanFieldState cavi_fit(const RegressionInstance& instance, const RegressionPrior& prior, const CaviOptions& options,
                        std::optional<MeanFieldState> init)
{
    instance.validate();
    if (options.max_sweeps < 1) throw std::domain_error("cavi_fit: max_sweeps must be >= 1");
    if (!(options.tol > 0.0)) throw std::domain_error("cavi_fit: tol must be > 0");
    const auto p = static_cast<std::size_t>(instance.design.cols());
    if (prior.p() != p) throw std::domain_error("cavi_fit: prior dimension does not match the design");
    if (prior.slab().kind() != SlabSpec::Kind::Laplace) throw std::domain_error("cavi_fit: requires a Laplace slab");
    for (std::size_t k = 0; k <= p; ++k)
        if (!std::isfinite(prior.log_support_weight(k)))
            throw std::domain_error("cavi_fit: dimension prior must charge every k");

    MeanFieldState s = init ? std::move(*init) : screening_init(instance, prior);
    s.validate(p);
    s.gamma = s.gamma.cwiseMax(kGammaMin).cwiseMin(kGammaMax);
    s.elbo_trace.clear();
    s.sweeps = 0;
    s.converged = false;

    const Eigen::MatrixXd& x = instance.design;
    const Eigen::VectorXd d = x.colwise().squaredNorm().transpose();
    const double lambda = prior.slab().scale();
    const double gamma_offset = std::log(0.5 * lambda) + kHalfLog2PiE;

    double current = elbo(s, instance, prior);
    if (!std::isfinite(current)) throw OptimizationError("cavi_fit: initial ELBO is not finite", s);
    s.elbo_trace.push_back(current);

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        std::vector<double> pk = poisson_binomial(s.gamma);
        Eigen::VectorXd resid = instance.response - x * s.mean();
        for (std::size_t ii = 0; ii < p; ++ii) {
            const auto i = static_cast<Eigen::Index>(ii);
            const double m_old = s.gamma[i] * s.mu[i];
            const SlabObjective f{x.col(i).dot(resid) + d[i] * m_old, d[i], lambda};

            const std::vector<double> q = deflate(pk, s.gamma[i]);
            const double delta = expect(q, prior, 1) - expect(q, prior, 0);
            const auto [mu, sigma] = maximize_slab(f, s.mu[i], s.sigma[i]);
            const double logit = delta + f.value(mu, sigma) + gamma_offset;
            const double g = std::clamp(1.0 / (1.0 + std::exp(-logit)), kGammaMin, kGammaMax);

            s.mu[i] = mu;
            s.sigma[i] = sigma;
            s.gamma[i] = g;
            resid -= x.col(i) * (g * mu - m_old);
            pk = convolve(q, g);
        }
        ++s.sweeps;
        const double next = elbo(s, instance, prior);
        if (!std::isfinite(next)) throw OptimizationError("cavi_fit: ELBO became non-finite", s);
        s.elbo_trace.push_back(next);
        const double gain = next - current;
        current = next;
        if (gain < options.tol) {
            s.converged = true;
            break;
        }
    }
    return s;
}

double kl_upper_bound(const MeanFieldState& state, const RegressionInstance& instance, const RegressionPrior& prior,
                      std::span<const double> theta0)
{
    const auto p = static_cast<std::size_t>(instance.design.cols());
    if (theta0.size() != p) throw std::domain_error("kl_upper_bound: theta0 length does not match the design");
    const double lower = elbo(state, instance, prior);

    const Eigen::MatrixXd& x = instance.design;
    const Eigen::VectorXd m = state.mean();
    const Eigen::VectorXd d = x.colwise().squaredNorm().transpose();
    double var_term = 0.0;
    for (Eigen::Index j = 0; j < m.size(); ++j) {
        const double second = state.gamma[j] * (state.mu[j] * state.mu[j] + state.sigma[j] * state.sigma[j]);
        var_term += d[j] * (second - m[j] * m[j]);
    }
    const double n = static_cast<double>(instance.response.size());
    const double expected_loglik =
        -0.5 * n * kLog2Pi - 0.5 * ((instance.response - x * m).squaredNorm() + var_term);
    // K(Q, Pi) = E_Q log-likelihood - ELBO.
    const double kl_prior = expected_loglik - lower;

    const Eigen::Map<const Eigen::VectorXd> th(theta0.data(), static_cast<Eigen::Index>(p));
    const double data_kl = 0.5 * ((x * (m - th)).squaredNorm() + var_term);
    return kl_prior + data_kl;
}

// ---------------------------------------------------------------------------

OracleResult enumeration_oracle(const RegressionInstance& instance, const RegressionPrior& prior, long mc_per_subset,
                                std::uint64_t seed, double rho)
{
    instance.validate();
    const Eigen::MatrixXd& x = instance.design;
    const Eigen::VectorXd& y = instance.response;
    const auto p = static_cast<std::size_t>(x.cols());
    const double n = static_cast<double>(x.rows());
    if (p > 12) throw std::domain_error("enumeration_oracle: p > 12 refused");
    if (prior.p() != p) throw std::domain_error("enumeration_oracle: prior dimension does not match the design");
    if (mc_per_subset < 10'000) throw std::domain_error("enumeration_oracle: mc_per_subset must be >= 10^4");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::domain_error("enumeration_oracle: rho outside (0,1]");

    const std::size_t subsets = std::size_t{1} << p;
    struct Support {
        std::vector<Eigen::Index> idx;
        double log_const = -INFINITY;  // everything except the slab expectation
        double bound = -INFINITY;
        Eigen::VectorXd theta_hat;
        Eigen::MatrixXd chol;  // lower factor of rho X_S'X_S
        bool evaluated = false;
        double scale = -INFINITY;  // log const + sample shift
        double sw = 0, sw2 = 0;
        std::vector<double> stw, stw2, st2w2;
    };
    std::vector<Support> sup(subsets);
    const double yy = y.squaredNorm();
    const double max_log_slab = prior.slab().log_density(0.0);

    for (std::size_t mask = 0; mask < subsets; ++mask) {
        Support& s = sup[mask];
        for (std::size_t j = 0; j < p; ++j)
            if (mask >> j & 1U) s.idx.push_back(static_cast<Eigen::Index>(j));
        const std::size_t k = s.idx.size();
        const double h = prior.log_support_weight(k);
        if (!std::isfinite(h)) continue;
        if (k == 0) {
            s.log_const = h - 0.5 * n * rho * kLog2Pi - 0.5 * rho * yy;
            s.bound = s.log_const;
            continue;
        }
        if (static_cast<double>(k) > n) continue;
        Eigen::MatrixXd xs(x.rows(), static_cast<Eigen::Index>(k));
        for (std::size_t c = 0; c < k; ++c) xs.col(static_cast<Eigen::Index>(c)) = x.col(s.idx[c]);
        const Eigen::MatrixXd a = xs.transpose() * xs;
        Eigen::LLT<Eigen::MatrixXd> llt(rho * a);
        if (llt.info() != Eigen::Success) continue;
        s.chol = llt.matrixL();
        s.theta_hat = a.ldlt().solve(xs.transpose() * y);
        const double rss = (y - xs * s.theta_hat).squaredNorm();
        const double log_det = 2.0 * s.chol.diagonal().array().log().sum();
        s.log_const = h - 0.5 * n * rho * kLog2Pi - 0.5 * rho * rss + 0.5 * static_cast<double>(k) * kLog2Pi -
                      0.5 * log_det;
        s.bound = s.log_const + static_cast<double>(k) * max_log_slab;
    }

    std::vector<std::size_t> order(subsets);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sup[a].bound > sup[b].bound; });

    const auto mc = static_cast<double>(mc_per_subset);
    double running = -INFINITY;
    std::vector<double> lw(static_cast<std::size_t>(mc_per_subset));
    std::vector<double> draws;
    for (std::size_t mask : order) {
        Support& s = sup[mask];
        if (s.bound == -INFINITY || s.bound < running - kOraclePruneGap) continue;
        s.evaluated = true;
        const std::size_t k = s.idx.size();
        s.stw.assign(k, 0.0);
        s.stw2.assign(k, 0.0);
        s.st2w2.assign(k, 0.0);
        if (k == 0) {
            s.scale = s.log_const;
            s.sw = mc;
            s.sw2 = mc;
            running = log_sum_exp(running, s.scale);
            continue;
        }
        Rng rng = derive_stream(seed, mask);
        draws.resize(static_cast<std::size_t>(mc_per_subset) * k);
        Eigen::VectorXd z(static_cast<Eigen::Index>(k));
        const auto upper = s.chol.transpose().triangularView<Eigen::Upper>();
        for (long m = 0; m < mc_per_subset; ++m) {
            for (Eigen::Index c = 0; c < z.size(); ++c) z[c] = standard_normal(rng);
            const Eigen::VectorXd th = s.theta_hat + upper.solve(z);
            double l = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                draws[static_cast<std::size_t>(m) * k + c] = th[static_cast<Eigen::Index>(c)];
                l += prior.slab().log_density(th[static_cast<Eigen::Index>(c)]);
            }
            lw[static_cast<std::size_t>(m)] = l;
        }
        const double shift = *std::max_element(lw.begin(), lw.end());
        for (long m = 0; m < mc_per_subset; ++m) {
            const double w = std::exp(lw[static_cast<std::size_t>(m)] - shift);
            s.sw += w;
            s.sw2 += w * w;
            for (std::size_t c = 0; c < k; ++c) {
                const double t = draws[static_cast<std::size_t>(m) * k + c];
                s.stw[c] += t * w;
                s.stw2[c] += t * w * w;
                s.st2w2[c] += t * t * w * w;
            }
        }
        s.scale = s.log_const + shift;
        running = log_sum_exp(running, s.scale + std::log(s.sw / mc));
    }

    // Combine with a common scale; f_S multiplies per-sample sums / M.
    double top = -INFINITY;
    for (const Support& s : sup)
        if (s.evaluated) top = std::max(top, s.scale);
    if (top == -INFINITY) throw std::domain_error("enumeration_oracle: posterior has no mass");

    double b = 0.0;
    for (const Support& s : sup)
        if (s.evaluated) b += std::exp(s.scale - top) * s.sw / mc;

    OracleResult out;
    out.inclusion.assign(p, 0.0);
    out.mean.assign(p, 0.0);
    for (const Support& s : sup) {
        if (!s.evaluated) continue;
        const double f = std::exp(s.scale - top);
        for (std::size_t c = 0; c < s.idx.size(); ++c) {
            const auto j = static_cast<std::size_t>(s.idx[c]);
            out.inclusion[j] += f * s.sw / mc / b;
            out.mean[j] += f * s.stw[c] / mc / b;
        }
    }

    // Delta-method standard errors; supports are sampled independently.
    const double corr = mc / (mc - 1.0);
    double var_b = 0.0;
    std::vector<double> var_incl(p, 0.0), var_mean(p, 0.0);
    for (const Support& s : sup) {
        if (!s.evaluated || s.idx.empty()) continue;
        const double f = std::exp(s.scale - top);
        const double wbar = s.sw / mc;
        const double var_w = std::max(0.0, (s.sw2 / mc - wbar * wbar) * corr);
        var_b += f * f * var_w / mc;
        std::vector<int> pos(p, -1);
        for (std::size_t c = 0; c < s.idx.size(); ++c) pos[static_cast<std::size_t>(s.idx[c])] = static_cast<int>(c);
        for (std::size_t j = 0; j < p; ++j) {
            const double pj = out.inclusion[j];
            const double mj = out.mean[j];
            const double in = pos[j] >= 0 ? 1.0 : 0.0;
            var_incl[j] += f * f * (in - pj) * (in - pj) * var_w / mc;
            if (pos[j] < 0) {
                var_mean[j] += f * f * mj * mj * var_w / mc;
            } else {
                const auto c = static_cast<std::size_t>(pos[j]);
                const double e2 = (s.st2w2[c] - 2.0 * mj * s.stw2[c] + mj * mj * s.sw2) / mc;
                const double e1 = s.stw[c] / mc - mj * wbar;
                var_mean[j] += f * f * std::max(0.0, (e2 - e1 * e1) * corr) / mc;
            }
        }
    }
    out.log_marginal = top + std::log(b);
    out.log_marginal_se = std::sqrt(var_b) / b;
    out.inclusion_se.resize(p);
    out.mean_se.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        out.inclusion_se[j] = std::sqrt(var_incl[j]) / b;
        out.mean_se[j] = std::sqrt(var_mean[j]) / b;
    }
    return out;
}

}  // namespace sbayes
