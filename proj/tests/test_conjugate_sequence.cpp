#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "sbayes/conjugate_sequence.hpp"
#include "sbayes/random.hpp"

using namespace sbayes;

TEST_CASE("conjugate posterior moments")
{
    const SeriesPrior unit(1.0, 1);  // sigma_1^2 = 1 for any smoothness
    CHECK(unit.variance(1) == 1.0);
    const std::vector<double> zero{0.0};
    const auto p = posterior_moments(zero, unit, 1, 1.0);
    CHECK(p.mean[0] == 0.0);
    CHECK(p.variance[0] == doctest::Approx(0.5));

    const SeriesPrior prior(1.0, 6);
    const std::vector<double> x{0.8, -0.3, 0.05, 0.2, -0.01, 0.4};
    const auto tiny = posterior_moments(x, prior, 100, 1e-12);
    for (std::size_t k = 1; k <= 6; ++k) {
        CHECK(std::abs(tiny.mean[k - 1]) <= 1e-8);
        CHECK(tiny.variance[k - 1] == doctest::Approx(prior.variance(k)).epsilon(1e-8));
    }

    for (double temper : {1.0, 0.3}) {
        const long long n = 40;
        const auto post = posterior_moments(x, prior, n, temper);
        for (std::size_t k = 1; k <= 6; ++k) {
            const double s2 = prior.variance(k), xk = x[k - 1];
            auto dens = [&](double t) {
                return std::exp(-temper * n * (xk - t) * (xk - t) / 2.0 - t * t / (2.0 * s2));
            };
            const double lo = -3.0, hi = 3.0;
            const double z = oracle::integrate(dens, lo, hi, 400);
            const double m = oracle::integrate([&](double t) { return t * dens(t); }, lo, hi, 400) / z;
            const double v = oracle::integrate([&](double t) { return (t - m) * (t - m) * dens(t); }, lo, hi, 400) / z;
            CHECK(std::abs(post.mean[k - 1] - m) <= 1e-8);
            CHECK(std::abs(post.variance[k - 1] - v) <= 1e-8);
            CHECK(post.variance[k - 1] <= std::min(1.0 / (n * temper), s2));
            CHECK(std::abs(post.mean[k - 1]) <= std::abs(xk));
        }
    }

    CHECK_THROWS_AS(posterior_moments(std::vector<double>{1.0}, prior, 10, 1.0), std::domain_error);
    CHECK_THROWS_AS(posterior_moments(x, prior, 10, 0.0), std::domain_error);
    CHECK_THROWS_AS(posterior_moments(x, prior, 10, 1.5), std::domain_error);
    CHECK_THROWS_AS(SeriesPrior(-1.0, 3), std::domain_error);
    CHECK_THROWS_AS(SeriesPrior(1.0, 0), std::domain_error);
}

TEST_CASE("risk terms")
{
    const SeriesPrior unit(1.0, 1);  // sigma_1^2 = 1 for any smoothness
    const auto t = risk_terms(std::vector<double>{1.0}, unit, 1);
    CHECK(t.term_a == doctest::Approx(0.5));
    CHECK(t.term_b == doctest::Approx(0.5));

    const SeriesPrior prior(1.0, 30);
    const long long n = 200;
    const auto z = risk_terms(std::vector<double>(30, 0.0), prior, n);
    double ref = 0.0;
    for (std::size_t k = 1; k <= 30; ++k) {
        const double inv = 1.0 / prior.variance(k);
        ref += n / ((n + inv) * (n + inv));
    }
    CHECK(z.term_b == doctest::Approx(ref).epsilon(1e-13));

    // Monte Carlo versions at K = 50, n = 100.
    const SeriesPrior p50(1.0, 50);
    const long long m = 100;
    std::vector<double> theta0(50);
    for (std::size_t k = 1; k <= 50; ++k) theta0[k - 1] = std::pow(double(k), -1.5);
    const auto closed = risk_terms(theta0, p50, m);
    const int reps = 1000;
    std::vector<double> bias(reps);
    double va = 0.0;
    for (int r = 0; r < reps; ++r) {
        Rng rng = derive_stream(77, r);
        std::vector<double> x(50);
        for (std::size_t k = 0; k < 50; ++k) x[k] = theta0[k] + standard_normal(rng) / std::sqrt(double(m));
        const auto post = posterior_moments(x, p50, m, 1.0);
        double b = 0.0;
        for (std::size_t k = 0; k < 50; ++k) b += (post.mean[k] - theta0[k]) * (post.mean[k] - theta0[k]);
        bias[r] = b;
        if (r == 0) va = std::accumulate(post.variance.begin(), post.variance.end(), 0.0);
    }
    const double mean = std::accumulate(bias.begin(), bias.end(), 0.0) / reps;
    double ss = 0.0;
    for (double b : bias) ss += (b - mean) * (b - mean);
    const double se = std::sqrt(ss / (reps - 1) / reps);
    CHECK(std::abs(mean - closed.term_b) <= 5 * se);
    CHECK(va == doctest::Approx(closed.term_a).epsilon(1e-12));

    // Entries of theta0 beyond K add their square to the bias term.
    std::vector<double> longer(theta0);
    longer.push_back(0.5);
    CHECK(risk_terms(longer, p50, m).term_b == doctest::Approx(closed.term_b + 0.25).epsilon(1e-13));
}

TEST_CASE("power-law risk and contraction slope")
{
    const SeriesPrior prior(1.0, 4096);
    std::vector<double> theta0(200000);
    for (std::size_t k = 1; k <= theta0.size(); ++k) theta0[k - 1] = std::pow(double(k), -1.5);
    const auto direct = risk_terms(theta0, prior, 4096);
    const auto tail = power_law_risk_terms(1.0, prior, 4096);
    CHECK(tail.term_a == doctest::Approx(direct.term_a).epsilon(1e-12));
    CHECK(tail.term_b == doctest::Approx(direct.term_b).epsilon(1e-6));

    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0}, ys{2.0, 4.1, 5.9, 8.0};
    CHECK(least_squares_slope(xs, ys) == doctest::Approx(1.98).epsilon(1e-12));

    std::vector<long long> grid;
    for (int e = 8; e <= 16; ++e) grid.push_back(1LL << e);
    const auto curve = contraction_curve(1.0, 1.0, grid);
    CHECK(curve.points.size() == grid.size());
    CHECK(std::abs(curve.slope + 2.0 / 3.0) <= 0.1);
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        CHECK(curve.points[i].terms.total() < curve.points[i - 1].terms.total());
}

TEST_CASE("functional posterior")
{
    FunctionalSpec spec;
    spec.truncation = 64;
    const long long n = 256;
    std::vector<double> x(64);
    Rng rng = derive_stream(19, 0);
    for (std::size_t k = 1; k <= 64; ++k) x[k - 1] = spec.truth(k) + standard_normal(rng) / std::sqrt(double(n));

    // Sampling oracle: draw from the product posterior and average psi.
    for (double temper : {1.0, 0.2}) {
        const auto fp = functional_posterior(x, spec, n, temper);
        const int draws = 20000;
        double s1 = 0.0, s2 = 0.0;
        for (int d = 0; d < draws; ++d) {
            double psi = 0.0;
            for (std::size_t k = 1; k <= 64; ++k) {
                const double lam = spec.prior_variance(k);
                const double v = lam / (1.0 + n * temper * lam);
                const double m = n * temper * v * x[k - 1];
                psi += spec.representer(k) * (m + std::sqrt(v) * standard_normal(rng));
            }
            s1 += psi;
            s2 += psi * psi;
        }
        const double mean = s1 / draws, sd = std::sqrt(s2 / draws - mean * mean);
        CHECK(std::abs(fp.center - mean) <= 4 * sd / std::sqrt(double(draws)));
        // sd of the sample sd is about sd / sqrt(2 draws)
        CHECK(std::abs(fp.sd - sd) <= 4 * sd / std::sqrt(2.0 * draws));
    }

    // Only a_1 nonzero: single-coordinate conjugate posterior.
    FunctionalSpec one = spec;
    one.truncation = 1;
    const auto single = functional_posterior(std::vector<double>{x[0]}, one, n, 1.0);
    const auto post = posterior_moments(std::vector<double>{x[0]}, SeriesPrior(spec.gamma, 1), n, 1.0);
    CHECK(single.center == doctest::Approx(post.mean[0]).epsilon(1e-13));
    CHECK(single.sd == doctest::Approx(std::sqrt(post.variance[0])).epsilon(1e-13));

    // Weak prior: center approaches sum a_k X_k.
    FunctionalSpec flat = spec;
    flat.gamma = 1e-9;
    double raw = 0.0;
    for (std::size_t k = 1; k <= 4; ++k) raw += flat.representer(k) * x[k - 1];
    flat.truncation = 4;
    CHECK(functional_posterior(std::vector<double>(x.begin(), x.begin() + 4), flat, 1000000, 1.0).center ==
          doctest::Approx(raw).epsilon(1e-4));

    double last_n = INFINITY;
    for (long long m : {64, 128, 256}) {
        const double sd = functional_posterior(x, spec, m, 1.0).sd;
        CHECK(sd <= last_n);
        last_n = sd;
    }
    double last_a = INFINITY;
    for (double a : {0.1, 0.5, 1.0}) {
        const double sd = functional_posterior(x, spec, n, a).sd;
        CHECK(sd <= last_a);
        last_a = sd;
    }

    FunctionalSpec bad;
    bad.mu = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    CHECK(functional_truth(spec, 2) == doctest::Approx(spec.truth(1) * spec.representer(1) + spec.truth(2) * spec.representer(2)));
}

TEST_CASE("shift-and-rescale interval")
{
    const auto same = shift_rescale_interval(1.0, 0.5, 2.0, 1.0);
    CHECK(same.lo == 0.5);
    CHECK(same.hi == 2.0);
    const auto point = shift_rescale_interval(3.0, 3.0, 3.0, 0.4);
    CHECK(point.length() == 0.0);
    CHECK_FALSE(point.contains(3.0 - 1e-12));
    const auto half = shift_rescale_interval(1.0, 1.0 - 0.6, 1.0 + 0.6, 0.25);
    CHECK(half.lo == doctest::Approx(0.7));
    CHECK(half.hi == doctest::Approx(1.3));
    CHECK(half.contains(1.3));
    CHECK_FALSE(half.contains(0.7));
    CHECK_THROWS_AS(shift_rescale_interval(0.0, 1.0, -1.0, 0.5), std::domain_error);
}

TEST_CASE("coverage Monte Carlo")
{
    FunctionalSpec spec;  // beta + mu = 2 > 1 + 2 gamma = 1.5
    const std::vector<long long> grid{1024};
    const auto plain = coverage_mc(spec, grid, 0.0, 0.05, 1000, 3);
    REQUIRE(plain.size() == 1);
    CHECK(plain[0].alpha_n == 1.0);
    CHECK(std::abs(plain[0].coverage.mean - 0.95) <= 0.05);

    const auto a = coverage_mc(spec, grid, 0.25, 0.05, 200, 3, 1);
    const auto b = coverage_mc(spec, grid, 0.25, 0.05, 200, 3, 2);
    CHECK(a[0].coverage.mean == b[0].coverage.mean);
    CHECK(a[0].mean_length == b[0].mean_length);
    CHECK_THROWS_AS(coverage_mc(spec, grid, 0.25, 1.5, 10, 3), std::domain_error);
}
