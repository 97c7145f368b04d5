#pragma once

// Noise and slab densities for the sparse sequence model, the Gaussian
// convolution g = phi * gamma, and divergence utilities on densities.

#include <span>
#include <vector>

#include "sbayes/random.hpp"

namespace sbayes {

// Standard normal helpers. All tails are evaluated so that they stay
// accurate (and finite in log space) far beyond |x| = 38.
double normal_pdf(double x);
double normal_log_pdf(double x);
double normal_cdf(double x);
double normal_survival(double x);
double normal_log_cdf(double x);
double normal_log_survival(double x);
// Upper quantile: returns x with normal_survival(x) == p.
double normal_upper_quantile(double p);

double log_sum_exp(double a, double b);
// log of the sum of exp(v_i); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v);
double log_binomial(double n, double k);

// Standardized symmetric noise density: Gaussian, or Subbotin with density
// proportional to exp(-|x|^zeta / zeta), zeta > 1 (zeta = 2 is Gaussian).
class NoiseModel {
public:
    enum class Kind { Gaussian, Subbotin };

    static NoiseModel gaussian();
    static NoiseModel subbotin(double zeta);

    Kind kind() const { return kind_; }
    double zeta() const { return zeta_; }

    double density(double x) const;
    double log_density(double x) const;
    double survival(double x) const;  // P(eps > x)
    double log_survival(double x) const;
    // Returns x with survival(x) == p, p in (0, 1).
    double upper_quantile(double p) const;
    double sample(Rng& rng) const;

private:
    NoiseModel(Kind kind, double zeta);

    Kind kind_;
    double zeta_;
    double log_norm_;  // log of the normalizing constant c_zeta
};

// Slab distribution of the spike-and-slab prior.
class SlabSpec {
public:
    enum class Kind { Laplace, Cauchy };

    static SlabSpec laplace(double scale = 1.0);
    static SlabSpec cauchy(double scale = 1.0);

    Kind kind() const { return kind_; }
    // Laplace: rate lambda of (lambda/2) exp(-lambda |u|). Cauchy: scale.
    double scale() const { return scale_; }

    double density(double u) const;
    double log_density(double u) const;

private:
    SlabSpec(Kind kind, double scale);

    Kind kind_;
    double scale_;
};

// g(x) = integral phi(x - u) gamma(u) du. Laplace slabs use the closed form,
// Cauchy slabs adaptive quadrature. Throws std::domain_error for non-finite x.
double marginal_g(double x, const SlabSpec& slab);
double log_marginal_g(double x, const SlabSpec& slab);

// log(g(x) / phi(x)), the log likelihood ratio slab-versus-spike.
double log_slab_ratio(double x, const SlabSpec& slab);

// Upper tail integral of g over [t, inf).
double marginal_g_survival(double t, const SlabSpec& slab);

// Evaluates g(x) for the convolved marginal.
class ConvolvedMarginal {
public:
    explicit ConvolvedMarginal(SlabSpec slab) : slab_(slab) {}
    const SlabSpec& slab() const { return slab_; }
    double operator()(double x) const { return marginal_g(x, slab_); }
    double log(double x) const { return log_marginal_g(x, slab_); }

private:
    SlabSpec slab_;
};

// Oracle threshold a*_n: sqrt(2 log(n/s)) for Gaussian noise,
// (zeta log(n/s))^(1/zeta) for Subbotin noise. Requires n > s >= 1.
double oracle_threshold(long long n, long long s, const NoiseModel& noise);
double oracle_threshold_ratio(double n_over_s, const NoiseModel& noise);

// Window delta_n = (log(n/s))^(-kappa). The Gaussian default is kappa = 1/4;
// for Subbotin noise kappa must lie in (0, 1 - 1/zeta).
double boundary_window(long long n, long long s, double kappa);
double default_window_exponent(const NoiseModel& noise);

// Closed-form Renyi divergence D_rho(N(mu, sigma^2), N(nu, tau^2)).
double renyi_gaussian(double rho, double mu, double sigma, double nu, double tau);

// Densities tabulated on a common, strictly increasing grid.
struct GridDensity {
    std::vector<double> grid;
    std::vector<double> values;
};

GridDensity tabulate(std::span<const double> grid, auto&& density)
{
    GridDensity out{{grid.begin(), grid.end()}, {}};
    out.values.reserve(grid.size());
    for (double x : grid) out.values.push_back(density(x));
    return out;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

// (rho - 1)^-1 log integral p^rho q^(1-rho), trapezoidal rule.
double renyi_numeric(double rho, const GridDensity& p, const GridDensity& q);
// integral |p - q|, trapezoidal rule.
double l1_distance(const GridDensity& p, const GridDensity& q);

}  // namespace sbayes
