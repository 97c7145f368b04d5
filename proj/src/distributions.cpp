#include "sbayes/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace sbayes {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))
constexpr double kQuadRelTol = 1e-10;
// phi(v) < 1e-320 beyond this; the Gaussian window truncates every convolution.
constexpr double kGaussianSupport = 38.5;

void require_finite(double x, const char* what)
{
    if (!std::isfinite(x)) throw std::domain_error(std::string(what) + ": non-finite argument");
}

template <class F>
double integrate(F&& f, double a, double b)
{
    if (!(b > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, kQuadRelTol);
}

// Integrates f over [a, b], splitting at the given interior breakpoints.
template <class F>
double integrate_pieces(F&& f, double a, double b, std::vector<double> breaks)
{
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    double prev = a;
    for (double p : breaks) {
        p = std::clamp(p, a, b);
        if (p > prev) {
            total += integrate(f, prev, p);
            prev = p;
        }
    }
    return total;
}

double cauchy_g(double x, double scale)
{
    const SlabSpec slab = SlabSpec::cauchy(scale);
    auto f = [&](double v) { return normal_pdf(v) * slab.density(x - v); };
    const double width = 20.0 * scale;
    return integrate_pieces(f, -kGaussianSupport, kGaussianSupport,
                            {x - width, x, x + width, 0.0});
}

}  // namespace

double log_sum_exp(double a, double b)
{
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_sum_exp(std::span<const double> v)
{
    double m = -INFINITY;
    for (double t : v) m = std::max(m, t);
    if (m == -INFINITY || !std::isfinite(m)) return m;
    double acc = 0.0;
    for (double t : v) acc += std::exp(t - m);
    return m + std::log(acc);
}

double log_binomial(double n, double k)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double normal_pdf(double x) { return std::exp(normal_log_pdf(x)); }

double normal_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_survival(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_cdf(double x) { return normal_survival(-x); }

double normal_log_survival(double x)
{
    if (x < -5.0) return std::log1p(-normal_survival(-x));
    if (x < 37.0) return std::log(normal_survival(x));
    // Asymptotic Mills-ratio series; truncation error < 1e-15 for x >= 37.
    const double z = 1.0 / (x * x);
    const double series =
        1.0 - z * (1.0 - 3.0 * z * (1.0 - 5.0 * z * (1.0 - 7.0 * z * (1.0 - 9.0 * z * (1.0 - 11.0 * z)))));
    return normal_log_pdf(x) - std::log(x) + std::log(series);
}

double normal_log_cdf(double x) { return normal_log_survival(-x); }

double normal_upper_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_upper_quantile: p outside (0,1)");
    return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

// ---------------------------------------------------------------------------

NoiseModel::NoiseModel(Kind kind, double zeta) : kind_(kind), zeta_(zeta), log_norm_(0.0)
{
    if (kind_ == Kind::Subbotin) {
        if (!(zeta_ > 1.0) || !std::isfinite(zeta_))
            throw std::domain_error("NoiseModel: Subbotin shape must be > 1");
        // integral exp(-|x|^z / z) dx = 2 z^(1/z) Gamma(1 + 1/z)
        log_norm_ = std::log(2.0) + std::log(zeta_) / zeta_ + std::lgamma(1.0 + 1.0 / zeta_);
    } else {
        zeta_ = 2.0;
        log_norm_ = kLogSqrt2Pi;
    }
}

NoiseModel NoiseModel::gaussian() { return NoiseModel(Kind::Gaussian, 2.0); }

NoiseModel NoiseModel::subbotin(double zeta) { return NoiseModel(Kind::Subbotin, zeta); }

double NoiseModel::log_density(double x) const
{
    if (kind_ == Kind::Gaussian) return normal_log_pdf(x);
    return -std::pow(std::abs(x), zeta_) / zeta_ - log_norm_;
}

double NoiseModel::density(double x) const { return std::exp(log_density(x)); }

double NoiseModel::survival(double x) const
{
    if (kind_ == Kind::Gaussian) return normal_survival(x);
    const double tail = 0.5 * boost::math::gamma_q(1.0 / zeta_, std::pow(std::abs(x), zeta_) / zeta_);
    return x >= 0.0 ? tail : 1.0 - tail;
}

double NoiseModel::log_survival(double x) const
{
    if (kind_ == Kind::Gaussian) return normal_log_survival(x);
    if (x <= 0.0) return std::log1p(-survival(-x));
    const double a = 1.0 / zeta_;
    const double z = std::pow(x, zeta_) / zeta_;
    const double q = boost::math::gamma_q(a, z);
    if (q > 1e-300) return std::log(0.5 * q);
    // Leading term of the incomplete-gamma asymptotic expansion.
    return std::log(0.5) + (a - 1.0) * std::log(z) - z - std::lgamma(a) + std::log1p((a - 1.0) / z);
}

double NoiseModel::upper_quantile(double p) const
{
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("upper_quantile: p outside (0,1)");
    if (kind_ == Kind::Gaussian) return normal_upper_quantile(p);
    if (p == 0.5) return 0.0;
    if (p > 0.5) return -upper_quantile(1.0 - p);
    const double z = boost::math::gamma_q_inv(1.0 / zeta_, 2.0 * p);
    return std::pow(zeta_ * z, 1.0 / zeta_);
}

double NoiseModel::sample(Rng& rng) const
{
    if (kind_ == Kind::Gaussian) return standard_normal(rng);
    // |eps|^zeta / zeta ~ Gamma(1/zeta, 1)
    std::gamma_distribution<double> shape(1.0 / zeta_, 1.0);
    const double magnitude = std::pow(zeta_ * shape(rng), 1.0 / zeta_);
    return uniform01(rng) < 0.5 ? -magnitude : magnitude;
}

// ---------------------------------------------------------------------------

SlabSpec::SlabSpec(Kind kind, double scale) : kind_(kind), scale_(scale)
{
    if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw std::domain_error("SlabSpec: scale must be > 0");
}

SlabSpec SlabSpec::laplace(double scale) { return SlabSpec(Kind::Laplace, scale); }

SlabSpec SlabSpec::cauchy(double scale) { return SlabSpec(Kind::Cauchy, scale); }

double SlabSpec::log_density(double u) const
{
    if (kind_ == Kind::Laplace) return std::log(0.5 * scale_) - scale_ * std::abs(u);
    const double z = u / scale_;
    return -std::log(std::numbers::pi * scale_) - std::log1p(z * z);
}

double SlabSpec::density(double u) const { return std::exp(log_density(u)); }

// ---------------------------------------------------------------------------

double log_marginal_g(double x, const SlabSpec& slab)
{
    require_finite(x, "marginal_g");
    x = std::abs(x);
    if (slab.kind() == SlabSpec::Kind::Laplace) {
        // g(x) = (l/2) e^{l^2/2} [ e^{-l x} Phi(x - l) + e^{l x} Phi-bar(x + l) ]
        const double l = slab.scale();
        const double right = -l * x + normal_log_cdf(x - l);
        const double left = l * x + normal_log_survival(x + l);
        return std::log(0.5 * l) + 0.5 * l * l + log_sum_exp(right, left);
    }
    return std::log(cauchy_g(x, slab.scale()));
}

double marginal_g(double x, const SlabSpec& slab)
{
    require_finite(x, "marginal_g");
    if (slab.kind() == SlabSpec::Kind::Cauchy) return cauchy_g(std::abs(x), slab.scale());
    return std::exp(log_marginal_g(x, slab));
}

double log_slab_ratio(double x, const SlabSpec& slab) { return log_marginal_g(x, slab) - normal_log_pdf(x); }

double marginal_g_survival(double t, const SlabSpec& slab)
{
    require_finite(t, "marginal_g_survival");
    // G-bar(t) = Gamma-bar(t) + integral_0^inf [gamma(t - v) - gamma(t + v)] Phi-bar(v) dv
    const double l = slab.scale();
    double slab_tail = 0.0;
    if (slab.kind() == SlabSpec::Kind::Laplace)
        slab_tail = t >= 0.0 ? 0.5 * std::exp(-l * t) : 1.0 - 0.5 * std::exp(l * t);
    else
        slab_tail = 0.5 - std::atan(t / l) / std::numbers::pi;
    auto f = [&](double v) { return (slab.density(t - v) - slab.density(t + v)) * normal_survival(v); };
    std::vector<double> breaks{std::abs(t)};
    if (slab.kind() == SlabSpec::Kind::Cauchy) breaks.push_back(std::abs(t) + 20.0 * l);
    return slab_tail + integrate_pieces(f, 0.0, kGaussianSupport, breaks);
}

// ---------------------------------------------------------------------------

double oracle_threshold_ratio(double n_over_s, const NoiseModel& noise)
{
    if (!(n_over_s > 1.0) || !std::isfinite(n_over_s))
        throw std::domain_error("oracle_threshold: requires n > s");
    const double l = std::log(n_over_s);
    if (noise.kind() == NoiseModel::Kind::Gaussian) return std::sqrt(2.0 * l);
    return std::pow(noise.zeta() * l, 1.0 / noise.zeta());
}

double oracle_threshold(long long n, long long s, const NoiseModel& noise)
{
    if (s < 1 || s >= n) throw std::domain_error("oracle_threshold: requires n > s >= 1");
    return oracle_threshold_ratio(static_cast<double>(n) / static_cast<double>(s), noise);
}

double boundary_window(long long n, long long s, double kappa)
{
    if (s < 1 || s >= n) throw std::domain_error("boundary_window: requires n > s >= 1");
    if (!(kappa > 0.0)) throw std::domain_error("boundary_window: kappa must be > 0");
    return std::pow(std::log(static_cast<double>(n) / static_cast<double>(s)), -kappa);
}

double default_window_exponent(const NoiseModel& noise)
{
    if (noise.kind() == NoiseModel::Kind::Gaussian) return 0.25;
    // midpoint of the admissible range (0, 1 - 1/zeta)
    return 0.5 * (1.0 - 1.0 / noise.zeta());
}

// ---------------------------------------------------------------------------

double renyi_gaussian(double rho, double mu, double sigma, double nu, double tau)
{
    if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("renyi_gaussian: rho outside (0,1)");
    if (!(sigma > 0.0) || !(tau > 0.0)) throw std::domain_error("renyi_gaussian: scales must be > 0");
    if (!std::isfinite(mu) || !std::isfinite(nu) || !std::isfinite(sigma) || !std::isfinite(tau))
        throw std::domain_error("renyi_gaussian: non-finite parameter");
    const double var_rho = (1.0 - rho) * sigma * sigma + rho * tau * tau;
    const double d = mu - nu;
    const double log_ratio =
        0.5 * std::log(var_rho) - (1.0 - rho) * std::log(sigma) - rho * std::log(tau);
    return rho * d * d / (2.0 * var_rho) + log_ratio / (1.0 - rho);
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points)
{
    if (points < 2 || !(hi > lo)) throw std::domain_error("uniform_grid: need hi > lo and >= 2 points");
    std::vector<double> g(points);
    const double h = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo + h * static_cast<double>(i);
    g.back() = hi;
    return g;
}

namespace {

void check_grids(const GridDensity& p, const GridDensity& q)
{
    if (p.grid.size() < 2 || p.grid.size() != p.values.size() || q.grid != p.grid ||
        q.values.size() != q.grid.size())
        throw std::domain_error("grid densities do not share a common grid");
}

template <class F>
double trapezoid(const std::vector<double>& grid, F&& f)
{
    double total = 0.0;
    double prev = f(0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double cur = f(i);
        total += 0.5 * (grid[i] - grid[i - 1]) * (prev + cur);
        prev = cur;
    }
    return total;
}

}  // namespace

double renyi_numeric(double rho, const GridDensity& p, const GridDensity& q)
{
    if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("renyi_numeric: rho outside (0,1)");
    check_grids(p, q);
    for (std::size_t i = 0; i < p.values.size(); ++i)
        if (!(p.values[i] > 0.0) || !(q.values[i] > 0.0))
            throw std::domain_error("renyi_numeric: densities must be strictly positive");
    const double affinity = trapezoid(p.grid, [&](std::size_t i) {
        return std::exp(rho * std::log(p.values[i]) + (1.0 - rho) * std::log(q.values[i]));
    });
    return std::log(affinity) / (rho - 1.0);
}

double l1_distance(const GridDensity& p, const GridDensity& q)
{
    check_grids(p, q);
    return trapezoid(p.grid, [&](std::size_t i) { return std::abs(p.values[i] - q.values[i]); });
}

}  // namespace sbayes
