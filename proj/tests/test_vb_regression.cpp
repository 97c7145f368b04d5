#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sbayes/empirical_bayes.hpp"
#include "sbayes/random.hpp"
#include "sbayes/vb_regression.hpp"

using namespace sbayes;

namespace {

std::vector<double> sparse_truth(std::size_t p, std::size_t s, double value)
{
    std::vector<double> t(p, 0.0);
    for (std::size_t j = 0; j < s; ++j) t[j * (p / s)] = j % 2 ? -value : value;
    return t;
}

RegressionPrior binomial_prior(std::size_t p, double alpha, double lambda)
{
    std::vector<double> w(p + 1);
    for (std::size_t k = 0; k <= p; ++k)
        w[k] = log_binomial(p, k) + k * std::log(alpha) + (p - k) * std::log1p(-alpha);
    return {w, SlabSpec::laplace(lambda)};
}

}  // namespace

TEST_CASE("design generation")
{
    const auto a = generate_design(30, 7, 5);
    const auto b = generate_design(30, 7, 5);
    CHECK(a == b);
    CHECK(a != generate_design(30, 7, 6));
    const auto big = generate_design(200, 50, 1);
    CHECK(std::abs(big.mean()) <= 4.0 / std::sqrt(200.0 * 50.0));

    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = generate_design(1000, 10, seed);
        for (Eigen::Index j = 0; j < x.cols(); ++j) worst = std::max(worst, std::abs(x.col(j).squaredNorm() / 1000.0 - 1.0));
    }
    CHECK(worst <= 5.0 / std::sqrt(1000.0));
    CHECK_THROWS_AS(generate_design(0, 3, 1), std::domain_error);

    const std::vector<double> theta{1.0, 0.0};
    const auto inst = simulate_regression(generate_design(4, 2, 3), theta, 3);
    CHECK(inst.response.size() == 4);
    CHECK_THROWS_AS(simulate_regression(generate_design(4, 3, 3), theta, 3), std::domain_error);
}

TEST_CASE("dimension prior")
{
    for (std::size_t p : {50, 200, 800}) {
        const auto prior = beta_binomial_regression_prior(p, 2.0, 1.0);
        const auto c = dimension_prior_constants(prior.dim_log_weights());
        CHECK(c.satisfied());
        const double lp = std::log(double(p));
        for (std::size_t s = 1; s <= p; ++s) {
            const double r = prior.dim_log_weights()[s] - prior.dim_log_weights()[s - 1];
            CHECK(r >= std::log(c.a1) - c.a3 * lp - 1e-9);
            CHECK(r <= std::log(c.a2) - c.a4 * lp + 1e-9);
        }
        CHECK(prior.log_support_weight(1) ==
              doctest::Approx(prior.dim_log_weights()[1] - std::log(double(p))).epsilon(1e-12));
    }
    CHECK_THROWS_AS(beta_binomial_regression_prior(10, 0.0, 1.0), std::domain_error);
}

TEST_CASE("ELBO")
{
    const std::size_t p = 6;
    const auto prior = beta_binomial_regression_prior(p, 1.0, 1.0);
    const auto inst = simulate_regression(generate_design(25, p, 2), sparse_truth(p, 2, 2.0), 2);

    MeanFieldState zero;
    zero.gamma = Eigen::VectorXd::Zero(p);
    zero.mu = Eigen::VectorXd::Ones(p);
    zero.sigma = Eigen::VectorXd::Ones(p);
    const double loglik0 = -0.5 * 25 * std::log(2 * std::numbers::pi) - 0.5 * inst.response.squaredNorm();
    CHECK(elbo(zero, inst, prior) == doctest::Approx(loglik0 + prior.log_support_weight(0)).epsilon(1e-12));

    MeanFieldState bad = zero;
    bad.sigma[0] = 0.0;
    CHECK_THROWS_AS(elbo(bad, inst, prior), std::domain_error);

    // Never above the exact log marginal.
    const auto oracle = enumeration_oracle(inst, prior, 10000, 4);
    const auto fit = cavi_fit(inst, prior);
    CHECK(elbo(fit, inst, prior) <= oracle.log_marginal + 3 * oracle.log_marginal_se);
    CHECK(elbo(screening_init(inst, prior), inst, prior) <= oracle.log_marginal);

    // Permuting coordinates together with the design columns.
    const std::vector<Eigen::Index> perm{3, 0, 5, 1, 4, 2};
    RegressionInstance permuted = inst;
    MeanFieldState ps = fit;
    for (std::size_t j = 0; j < p; ++j) {
        permuted.design.col(Eigen::Index(j)) = inst.design.col(perm[j]);
        ps.gamma[Eigen::Index(j)] = fit.gamma[perm[j]];
        ps.mu[Eigen::Index(j)] = fit.mu[perm[j]];
        ps.sigma[Eigen::Index(j)] = fit.sigma[perm[j]];
    }
    CHECK(std::abs(elbo(ps, permuted, prior) - elbo(fit, inst, prior)) <= 1e-10);

    // The permuted fit is the permuted state.
    const auto refit = cavi_fit(permuted, prior, {}, ps);
    for (std::size_t j = 0; j < p; ++j) CHECK(std::abs(refit.mean()[Eigen::Index(j)] - ps.mean()[Eigen::Index(j)]) <= 1e-4);
}

TEST_CASE("CAVI")
{
    SUBCASE("single strong coefficient")
    {
        const std::vector<double> theta{10.0};
        const auto inst = simulate_regression(generate_design(50, 1, 8), theta, 8);
        const auto fit = cavi_fit(inst, binomial_prior(1, 0.5, 1.0));
        const double ls = inst.design.col(0).dot(inst.response) / inst.design.col(0).squaredNorm();
        CHECK(fit.gamma[0] >= 0.99);
        CHECK(std::abs(fit.mu[0] - ls) <= 0.2);
        CHECK(fit.converged);
    }

    SUBCASE("monotone ELBO and fixed point")
    {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const std::size_t p = 40;
            const auto inst = simulate_regression(generate_design(30, p, seed), sparse_truth(p, 3, 3.0), seed);
            const auto prior = beta_binomial_regression_prior(p, 1.0, 1.0);
            const auto fit = cavi_fit(inst, prior);
            for (std::size_t t = 1; t < fit.elbo_trace.size(); ++t)
                CHECK(fit.elbo_trace[t] - fit.elbo_trace[t - 1] >= -1e-9);
            for (Eigen::Index j = 0; j < Eigen::Index(p); ++j) {
                CHECK(fit.gamma[j] >= 0.0);
                CHECK(fit.gamma[j] <= 1.0);
                CHECK(fit.sigma[j] > 0.0);
            }
            const CaviOptions opts;
            const auto again = cavi_fit(inst, prior, opts, fit);
            CHECK(again.elbo_trace.back() - fit.elbo_trace.back() < opts.tol + 1e-9);
        }
    }

    SUBCASE("p much larger than n")
    {
        // Screening starts with about p/4 coordinates half in; the dimension
        // distribution then has a far tail that must survive repeated
        // leave-one-out updates.
        const std::size_t p = 800;
        const double signal = 3.0 * std::sqrt(2.0 * std::log(double(p)));
        const auto truth = sparse_truth(p, 5, signal);
        const auto inst = simulate_regression(generate_design(100, p, 3), truth, 3);
        const auto fit = cavi_fit(inst, beta_binomial_regression_prior(p, 2.0, 1.0));
        CHECK(fit.converged);
        for (std::size_t t = 1; t < fit.elbo_trace.size(); ++t)
            CHECK(fit.elbo_trace[t] - fit.elbo_trace[t - 1] >= -1e-9);
        CHECK(fit.gamma.sum() == doctest::Approx(5.0).epsilon(0.01));
        for (std::size_t j = 0; j < p; ++j)
            if (truth[j] != 0.0) {
                CHECK(fit.gamma[Eigen::Index(j)] > 0.99);
                CHECK(std::abs(fit.mu[Eigen::Index(j)] - truth[j]) < 1.0);
            }
    }

    SUBCASE("null model keeps the fitted dimension small")
    {
        const std::size_t p = 200;
        const auto prior = beta_binomial_regression_prior(p, 2.0, 1.0);
        int small = 0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto inst = simulate_regression(generate_design(100, p, 1000 + seed), std::vector<double>(p, 0.0), seed);
            small += cavi_fit(inst, prior).gamma.sum() <= 2.0;
        }
        CHECK(small >= 45);
    }

    const auto inst = simulate_regression(generate_design(10, 3, 1), std::vector<double>(3, 0.0), 1);
    CHECK_THROWS_AS(cavi_fit(inst, beta_binomial_regression_prior(4, 1.0, 1.0)), std::domain_error);
    CHECK_THROWS_AS(cavi_fit(inst, RegressionPrior({0.0, 0.0, 0.0, 0.0}, SlabSpec::cauchy(1.0))), std::domain_error);
    CaviOptions none;
    none.max_sweeps = 0;
    CHECK_THROWS_AS(cavi_fit(inst, beta_binomial_regression_prior(3, 1.0, 1.0), none), std::domain_error);
}

TEST_CASE("enumeration oracle")
{
    SUBCASE("empty model only")
    {
        const auto inst = simulate_regression(generate_design(20, 3, 2), sparse_truth(3, 1, 4.0), 2);
        const RegressionPrior prior({0.0, -INFINITY, -INFINITY, -INFINITY}, SlabSpec::laplace(1.0));
        const auto r = enumeration_oracle(inst, prior, 10000, 1);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(r.inclusion[j] == 0.0);
            CHECK(r.mean[j] == 0.0);
        }
    }

    SUBCASE("orthogonal design factorizes")
    {
        const Eigen::MatrixXd raw = generate_design(20, 2, 6);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
        Eigen::MatrixXd x = qr.householderQ() * Eigen::MatrixXd::Identity(20, 2);
        x.col(0) *= 3.0;
        x.col(1) *= 2.0;
        const std::vector<double> theta{1.2, 0.0};
        const auto inst = simulate_regression(x, theta, 6);
        const double alpha = 0.3;
        const auto r = enumeration_oracle(inst, binomial_prior(2, alpha, 1.0), 40000, 9);
        for (Eigen::Index j = 0; j < 2; ++j) {
            const double z = x.col(j).dot(inst.response), d = x.col(j).squaredNorm();
            const double peak = z / d;
            auto lik = [&](double t) { return std::exp(z * t - 0.5 * d * t * t - (z * peak - 0.5 * d * peak * peak)); };
            const std::vector<double> pts{peak - 12.0, 0.0, peak + 12.0};
            const double m0 = oracle::integrate_real_line([&](double t) { return lik(t) * oracle::laplace(t); }, pts);
            const double m1 =
                oracle::integrate_real_line([&](double t) { return t * lik(t) * oracle::laplace(t); }, pts);
            // Likelihood at theta_j = 0, on the same shifted scale.
            const double null = std::exp(-(z * peak - 0.5 * d * peak * peak));
            const double incl = alpha * m0 / (alpha * m0 + (1 - alpha) * null);
            const double mean = incl * m1 / m0;
            CHECK(std::abs(r.inclusion[j] - incl) <= 3 * r.inclusion_se[j] + 1e-12);
            CHECK(std::abs(r.mean[j] - mean) <= 3 * r.mean_se[j] + 1e-12);
        }
    }

    SUBCASE("standard errors shrink with the sample size")
    {
        const std::size_t p = 4;
        const auto inst = simulate_regression(generate_design(15, p, 3), sparse_truth(p, 1, 1.0), 3);
        const auto prior = beta_binomial_regression_prior(p, 1.0, 1.0);
        const auto a = enumeration_oracle(inst, prior, 10000, 2);
        const auto b = enumeration_oracle(inst, prior, 40000, 2);
        CHECK(b.log_marginal_se / a.log_marginal_se == doctest::Approx(0.5).epsilon(0.3));
        for (std::size_t j = 0; j < p; ++j) CHECK(b.mean_se[j] / a.mean_se[j] == doctest::Approx(0.5).epsilon(0.3));
    }

    const auto big = simulate_regression(generate_design(20, 13, 1), std::vector<double>(13, 0.0), 1);
    CHECK_THROWS_AS(enumeration_oracle(big, beta_binomial_regression_prior(13, 1.0, 1.0), 10000, 1), std::domain_error);
    const auto small = simulate_regression(generate_design(20, 3, 1), std::vector<double>(3, 0.0), 1);
    CHECK_THROWS_AS(enumeration_oracle(small, beta_binomial_regression_prior(3, 1.0, 1.0), 100, 1), std::domain_error);
}

TEST_CASE("KL upper bound")
{
    const std::size_t p = 4;
    const auto prior = beta_binomial_regression_prior(p, 1.0, 1.0);
    const auto x = generate_design(30, p, 12);
    const std::vector<double> theta0{2.0, 0.0, 0.0, -1.5};
    const auto first = simulate_regression(x, theta0, 100);

    MeanFieldState point;
    point.gamma = Eigen::VectorXd(p);
    point.mu = Eigen::VectorXd(p);
    point.sigma = Eigen::VectorXd::Constant(p, 1e-6);
    for (std::size_t j = 0; j < p; ++j) {
        point.gamma[Eigen::Index(j)] = theta0[j] != 0.0 ? 1.0 : 0.0;
        point.mu[Eigen::Index(j)] = theta0[j];
    }
    const double total = kl_upper_bound(point, first, prior, theta0);
    CHECK(std::isfinite(total));
    // At theta0 the data term vanishes; moving theta0 adds exactly ||X shift||^2 / 2.
    std::vector<double> moved(theta0);
    moved[1] += 0.7;
    const double shift = 0.5 * 0.49 * x.col(1).squaredNorm();
    CHECK(kl_upper_bound(point, first, prior, moved) - total == doctest::Approx(shift).epsilon(1e-6));

    // E over Y of K(Q, Pi(. | Y)) stays below the bound for a fixed Q.
    const auto q = cavi_fit(first, prior);
    const double bound = kl_upper_bound(q, first, prior, theta0);
    double avg = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
        const auto inst = simulate_regression(x, theta0, 200 + r);
        avg += enumeration_oracle(inst, prior, 10000, r).log_marginal - elbo(q, inst, prior);
    }
    avg /= reps;
    CHECK(avg >= -1e-6);
    CHECK(avg <= bound);

    // Independent of the response: only the design and theta0 enter.
    CHECK(kl_upper_bound(q, simulate_regression(x, theta0, 999), prior, theta0) == doctest::Approx(bound).epsilon(1e-10));
}
