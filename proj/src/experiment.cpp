#include "sbayes/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "sbayes/conjugate_sequence.hpp"
#include "sbayes/distributions.hpp"
#include "sbayes/empirical_bayes.hpp"
#include "sbayes/multiple_testing.hpp"
#include "sbayes/parallel.hpp"
#include "sbayes/sas_posterior.hpp"
#include "sbayes/vb_regression.hpp"

namespace sbayes {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(trim(item));
    return parts;
}

double parse_number(const std::string& field, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError(field, "expected a finite number, got '" + text + "'");
    return v;
}

// Allowed keys per experiment kind, in addition to the run fields.
const std::map<std::string, std::set<std::string>>& allowed_keys()
{
    static const std::map<std::string, std::set<std::string>> keys = {
        {"risk-boundary",
         {"n", "s", "b", "b_pairs", "q", "procedure", "prior", "t", "alpha", "level", "slab", "slab_scale", "noise",
          "zeta", "signs"}},
        {"lower-bound", {"n", "s", "b", "rho", "kappa", "noise", "zeta"}},
        {"bayes-fdr", {"n", "alpha", "t", "slab", "slab_scale"}},
        {"contraction", {"alpha_prior", "beta", "n"}},
        {"coverage", {"n", "beta", "mu", "gamma", "delta", "alpha_exponent", "truncation"}},
        {"vb-fit", {"n", "p", "s", "signal", "u", "lambda", "max_sweeps", "tol"}},
        {"vb-scaling", {"n", "p", "s", "signal", "u", "lambda", "max_sweeps", "tol"}},
        {"mmle", {"n", "s", "b", "slab", "slab_scale"}},
    };
    return keys;
}

NoiseModel noise_from(const ExperimentConfig& c)
{
    const std::string kind = c.text_or("noise", "gaussian");
    if (kind == "gaussian") return NoiseModel::gaussian();
    if (kind == "subbotin") {
        const double zeta = c.number("zeta");
        if (!(zeta > 1.0)) throw ConfigError("zeta", "Subbotin shape must be > 1");
        return NoiseModel::subbotin(zeta);
    }
    throw ConfigError("noise", "expected gaussian or subbotin");
}

SlabSpec slab_from(const ExperimentConfig& c)
{
    const double scale = c.number_or("slab_scale", 1.0);
    if (!(scale > 0.0)) throw ConfigError("slab_scale", "must be > 0");
    const std::string kind = c.text_or("slab", "laplace");
    if (kind == "laplace") return SlabSpec::laplace(scale);
    if (kind == "cauchy") return SlabSpec::cauchy(scale);
    throw ConfigError("slab", "expected laplace or cauchy");
}

void require_range(const std::string& field, double v, double lo, double hi, const char* what)
{
    if (!(v > lo && v < hi)) throw ConfigError(field, what);
}

void require_ns(const ExperimentConfig& c)
{
    const long long n = c.integer("n");
    const long long s = c.integer("s");
    if (s < 1) throw ConfigError("s", "must be >= 1");
    if (s >= n) throw ConfigError("s", "must be smaller than n");
}

struct TwoGroup {
    double b1, b2, q;
};

std::vector<TwoGroup> signal_groups(const ExperimentConfig& c)
{
    std::vector<TwoGroup> groups;
    if (c.has("b_pairs")) {
        const double q = c.number_or("q", 0.5);
        if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("q", "must lie in [0,1]");
        for (const std::string& pair : split(c.params.at("b_pairs"), ',')) {
            const auto xy = split(pair, ':');
            if (xy.size() != 2) throw ConfigError("b_pairs", "expected entries of the form x:y");
            const double x = parse_number("b_pairs", xy[0]);
            const double y = parse_number("b_pairs", xy[1]);
            groups.push_back({std::max(x, y), std::min(x, y), q});
        }
    } else if (c.has("b")) {
        for (double b : c.numbers("b")) groups.push_back({b, b, 1.0});
    } else {
        throw ConfigError("b", "required (or b_pairs)");
    }
    if (groups.empty()) throw ConfigError("b", "empty list");
    return groups;
}

// floor(s q) signals at a* + b1, the rest at a* + b2.
std::vector<double> group_offsets(const TwoGroup& g, long long s)
{
    const auto high = static_cast<long long>(std::floor(static_cast<double>(s) * g.q));
    std::vector<double> b(static_cast<std::size_t>(s), g.b2);
    std::fill(b.begin(), b.begin() + high, g.b1);
    return b;
}

std::vector<long long> integer_list(const ExperimentConfig& c, const std::string& key)
{
    std::vector<long long> out;
    for (double v : c.numbers(key)) {
        if (v != std::floor(v) || v < 1.0) throw ConfigError(key, "expected positive integers");
        out.push_back(static_cast<long long>(v));
    }
    return out;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ---------------------------------------------------------------------------
// Per-kind checks. They throw ConfigError on the first hard error and append
// warnings.

void check_risk_boundary(const ExperimentConfig& c, std::vector<std::string>& warnings)
{
    require_ns(c);
    const NoiseModel noise = noise_from(c);
    slab_from(c);
    const long long n = c.integer("n"), s = c.integer("s");
    const double a = oracle_threshold(n, s, noise);
    for (const TwoGroup& g : signal_groups(c))
        if (!(a + std::min(g.b1, g.b2) > 0.0))
            throw ConfigError(c.has("b_pairs") ? "b_pairs" : "b",
                              "a* + b must be positive (a* = " + format_number(a) + ")");
    const std::string proc = c.text_or("procedure", "oracle");
    if (proc == "lvalue") {
        require_range("t", c.number_or("t", 0.3), 0.0, 1.0, "must lie in (0,1)");
        const std::string prior = c.text_or("prior", "mmle");
        if (prior == "fixed") {
            const double alpha = c.number("alpha");
            if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "must lie in [0,1]");
        } else if (prior != "mmle" && prior != "beta-binomial") {
            throw ConfigError("prior", "expected mmle, fixed or beta-binomial");
        }
        if (noise.kind() != NoiseModel::Kind::Gaussian)
            throw ConfigError("noise", "l-value procedures assume Gaussian noise");
    } else if (proc == "bh") {
        require_range("level", c.number_or("level", 0.1), 0.0, 1.0, "must lie in (0,1)");
    } else if (proc != "oracle" && proc != "never") {
        throw ConfigError("procedure", "expected oracle, lvalue, bh or never");
    }
    const std::string signs = c.text_or("signs", "random");
    if (signs != "random" && signs != "positive") throw ConfigError("signs", "expected random or positive");
    (void)warnings;
}

double lower_bound_kappa(const ExperimentConfig& c, const NoiseModel& noise)
{
    const double kappa = c.number_or("kappa", default_window_exponent(noise));
    if (!(kappa > 0.0)) throw ConfigError("kappa", "must be > 0");
    if (noise.kind() == NoiseModel::Kind::Subbotin && !(kappa < 1.0 - 1.0 / noise.zeta()))
        throw ConfigError("kappa", "must lie in (0, 1 - 1/zeta) for Subbotin noise");
    return kappa;
}

void check_lower_bound(const ExperimentConfig& c, std::vector<std::string>& warnings)
{
    require_ns(c);
    const NoiseModel noise = noise_from(c);
    const long long n = c.integer("n"), s = c.integer("s");
    const double a = oracle_threshold(n, s, noise);
    for (double b : c.has("b") ? c.numbers("b") : std::vector<double>{0.0})
        if (!(a + b > 0.0)) throw ConfigError("b", "a* + b must be positive (a* = " + format_number(a) + ")");
    const double upper = rho_upper_limit(n, s, noise, lower_bound_kappa(c, noise));
    if (c.has("rho")) {
        const double rho = c.number("rho");
        if (!(rho >= 1.0)) throw ConfigError("rho", "must be >= 1");
        if (rho > upper)
            warnings.push_back("rho = " + format_number(rho) + " lies above the admissible window (upper end " +
                               format_number(upper) + ")");
    } else if (upper < 1.0) {
        warnings.push_back("admissible rho window is empty (upper end " + format_number(upper) +
                           "); using rho = 1");
    }
}

void check_bayes_fdr(const ExperimentConfig& c, std::vector<std::string>&)
{
    if (c.integer("n") < 1) throw ConfigError("n", "must be >= 1");
    const double alpha = c.number("alpha");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "must lie in [0,1]");
    if (c.has("t"))
        for (double t : c.numbers("t")) require_range("t", t, 0.0, 1.0, "must lie in (0,1)");
    slab_from(c);
}

void check_contraction(const ExperimentConfig& c, std::vector<std::string>&)
{
    if (!(c.number_or("alpha_prior", 1.0) > 0.0)) throw ConfigError("alpha_prior", "must be > 0");
    if (!(c.number_or("beta", 1.0) > 0.0)) throw ConfigError("beta", "must be > 0");
    if (c.has("n") && integer_list(c, "n").size() < 2) throw ConfigError("n", "need at least two grid points");
}

void check_coverage(const ExperimentConfig& c, std::vector<std::string>&)
{
    integer_list(c, "n");
    for (const char* key : {"beta", "mu", "gamma"})
        if (!(c.number_or(key, 1.0) > 0.0)) throw ConfigError(key, "must be > 0");
    require_range("delta", c.number_or("delta", 0.05), 0.0, 1.0, "must lie in (0,1)");
    if (c.has("alpha_exponent"))
        for (double e : c.numbers("alpha_exponent"))
            if (!(e >= 0.0)) throw ConfigError("alpha_exponent", "must be >= 0");
    if (c.has("truncation") && c.integer("truncation") < 1) throw ConfigError("truncation", "must be >= 1");
}

void check_vb(const ExperimentConfig& c, bool scaling)
{
    const long long p = c.integer("p");
    const long long s = c.integer("s");
    if (p < 1) throw ConfigError("p", "must be >= 1");
    if (s < 0 || s > p) throw ConfigError("s", "must lie in [0, p]");
    if (scaling) {
        if (integer_list(c, "n").size() < 2) throw ConfigError("n", "need at least two sample sizes");
    } else if (c.integer("n") < 1) {
        throw ConfigError("n", "must be >= 1");
    }
    if (!(c.number_or("u", 2.0) > 0.0)) throw ConfigError("u", "must be > 0");
    if (!(c.number_or("lambda", 1.0) > 0.0)) throw ConfigError("lambda", "must be > 0");
    if (c.integer_or("max_sweeps", 500) < 1) throw ConfigError("max_sweeps", "must be >= 1");
    if (!(c.number_or("tol", 1e-8) > 0.0)) throw ConfigError("tol", "must be > 0");
    if (c.has("signal")) c.number("signal");
}

void check_mmle(const ExperimentConfig& c, std::vector<std::string>&)
{
    const auto ns = integer_list(c, "n");
    const long long s = c.integer("s");
    if (s < 1) throw ConfigError("s", "must be >= 1");
    const double b = c.number_or("b", 0.0);
    for (long long n : ns) {
        if (s >= n) throw ConfigError("s", "must be smaller than every n");
        if (!(oracle_threshold(n, s, NoiseModel::gaussian()) + b > 0.0))
            throw ConfigError("b", "a* + b must be positive");
    }
    slab_from(c);
}

// ---------------------------------------------------------------------------

ExperimentResult run_risk_boundary(const ExperimentConfig& c)
{
    ExperimentResult r;
    r.table.header = {"b1",  "b2",     "q",    "lambda",  "fdr", "fdr_se", "fnr", "fnr_se", "risk",
                      "risk_se", "classification", "classification_se", "replicates"};
    SignalConfig sc;
    sc.n = c.integer("n");
    sc.s = c.integer("s");
    sc.noise = noise_from(c);
    sc.random_signs = c.text_or("signs", "random") == "random";

    ProcedureSpec proc;
    const std::string kind = c.text_or("procedure", "oracle");
    if (kind == "oracle") proc.kind = ProcedureKind::Oracle;
    if (kind == "bh") proc.kind = ProcedureKind::BH;
    if (kind == "never") proc.kind = ProcedureKind::NeverReject;
    if (kind == "lvalue") proc.kind = ProcedureKind::LValue;
    proc.t = c.number_or("t", 0.3);
    proc.level = c.number_or("level", 0.1);
    const std::string prior = c.text_or("prior", "mmle");
    proc.lvalue.source = prior == "fixed"           ? PriorSource::FixedAlpha
                         : prior == "beta-binomial" ? PriorSource::BetaBinomial
                                                    : PriorSource::Mmle;
    proc.lvalue.alpha = c.number_or("alpha", 0.0);
    proc.lvalue.slab = slab_from(c);

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const TwoGroup& g : signal_groups(c)) {
        sc.b = group_offsets(g, sc.s);
        const double lambda = lambda_boundary(sc.b, sc.noise);
        const RiskReport rep = risk_mc(sc, proc, c.replicates, c.seed, c.workers);
        r.table.rows.push_back({g.b1, g.b2, g.q, lambda, rep.fdr.mean, rep.fdr.mc_std_error, rep.fnr.mean,
                                rep.fnr.mc_std_error, rep.risk.mean, rep.risk.mc_std_error, rep.classification.mean,
                                rep.classification.mc_std_error, static_cast<double>(c.replicates)});
        rows.push_back({{"b1", g.b1}, {"b2", g.b2}, {"lambda", lambda}, {"risk", rep.risk.mean},
                        {"risk_minus_lambda", rep.risk.mean - lambda}});
    }
    r.summary["oracle_threshold"] = oracle_threshold(sc.n, sc.s, sc.noise);
    r.summary["boundary_comparison"] = rows;
    return r;
}

ExperimentResult run_lower_bound(const ExperimentConfig& c)
{
    ExperimentResult r;
    r.table.header = {"b", "rho", "rho_upper", "target", "m_rho_over_s", "se", "replicates"};
    const long long n = c.integer("n"), s = c.integer("s");
    const NoiseModel noise = noise_from(c);
    const double upper = rho_upper_limit(n, s, noise, lower_bound_kappa(c, noise));
    const double rho = c.has("rho") ? c.number("rho") : std::max(1.0, std::floor(upper));
    for (double b : c.has("b") ? c.numbers("b") : std::vector<double>{0.0}) {
        const LowerBoundReport rep = bayes_lower_bound_mrho(n, s, b, rho, c.replicates, c.seed, noise, c.workers);
        r.table.rows.push_back({b, rho, upper, noise.survival(b), rep.m_rho_over_s.mean,
                                rep.m_rho_over_s.mc_std_error, static_cast<double>(c.replicates)});
    }
    r.summary["rho"] = rho;
    r.summary["rho_upper"] = upper;
    return r;
}

ExperimentResult run_bayes_fdr(const ExperimentConfig& c)
{
    ExperimentResult r;
    r.table.header = {"t", "fdr", "fdr_se", "fnr", "fnr_se", "replicates"};
    const SasPrior prior(c.number("alpha"), slab_from(c));
    const auto ts = c.has("t") ? c.numbers("t") : std::vector<double>{0.1, 0.3, 0.5};
    nlohmann::ordered_json control = nlohmann::ordered_json::array();
    for (double t : ts) {
        const BayesFdrReport rep = bayes_fdr_mc(c.integer("n"), prior, t, c.replicates, c.seed, c.workers);
        r.table.rows.push_back(
            {t, rep.fdr.mean, rep.fdr.mc_std_error, rep.fnr.mean, rep.fnr.mc_std_error, double(c.replicates)});
        control.push_back({{"t", t}, {"fdr_le_t_plus_3se", rep.fdr.mean <= t + 3.0 * rep.fdr.mc_std_error}});
    }
    r.summary["control"] = control;
    return r;
}

ExperimentResult run_contraction(const ExperimentConfig& c)
{
    ExperimentResult r;
    r.table.header = {"n", "term_a", "term_b", "total"};
    std::vector<long long> grid;
    if (c.has("n"))
        grid = integer_list(c, "n");
    else
        for (int e = 8; e <= 16; ++e) grid.push_back(1LL << e);
    const double alpha = c.number_or("alpha_prior", 1.0);
    const double beta = c.number_or("beta", 1.0);
    const ContractionCurve curve = contraction_curve(alpha, beta, grid);
    for (const auto& pt : curve.points)
        r.table.rows.push_back({double(pt.n), pt.terms.term_a, pt.terms.term_b, pt.terms.total()});
    r.summary["slope"] = curve.slope;
    r.summary["predicted_slope"] = -2.0 * std::min(alpha, beta) / (2.0 * alpha + 1.0);
    return r;
}

ExperimentResult run_coverage(const ExperimentConfig& c)
{
    ExperimentResult r;
    r.table.header = {"n", "alpha_exponent", "alpha_n", "coverage", "coverage_se", "length", "replicates"};
    FunctionalSpec spec;
    spec.beta = c.number_or("beta", 1.0);
    spec.mu = c.number_or("mu", 1.0);
    spec.gamma = c.number_or("gamma", 0.25);
    spec.truncation = static_cast<std::size_t>(c.integer_or("truncation", 0));
    const double delta = c.number_or("delta", 0.05);
    const auto grid = integer_list(c, "n");
    const auto exps = c.has("alpha_exponent") ? c.numbers("alpha_exponent") : std::vector<double>{0.0};
    for (double e : exps)
        for (const CoveragePoint& pt : coverage_mc(spec, grid, e, delta, c.replicates, c.seed, c.workers))
            r.table.rows.push_back({double(pt.n), e, pt.alpha_n, pt.coverage.mean, pt.coverage.mc_std_error,
                                    pt.mean_length, double(c.replicates)});
    r.summary["nominal"] = 1.0 - delta;
    r.summary["regular_case"] = spec.beta + spec.mu > 1.0 + 2.0 * spec.gamma;
    return r;
}

struct VbRun {
    double l2_error, sum_gamma, elbo, sweeps, min_increment, converged;
};

VbRun vb_replicate(long long n, const ExperimentConfig& c, std::uint64_t seed)
{
    const long long p = c.integer("p");
    const long long s = c.integer("s");
    const double signal = c.number_or("signal", 3.0 * std::sqrt(2.0 * std::log(static_cast<double>(p))));
    const RegressionPrior prior =
        beta_binomial_regression_prior(static_cast<std::size_t>(p), c.number_or("u", 2.0), c.number_or("lambda", 1.0));
    CaviOptions opt;
    opt.max_sweeps = static_cast<int>(c.integer_or("max_sweeps", 500));
    opt.tol = c.number_or("tol", 1e-8);

    Rng rng = derive_stream(seed, 2);
    std::vector<double> theta0(static_cast<std::size_t>(p), 0.0);
    for (std::size_t j : random_subset(static_cast<std::size_t>(p), static_cast<std::size_t>(s), rng))
        theta0[j] = uniform01(rng) < 0.5 ? -signal : signal;
    const RegressionInstance inst = simulate_regression(generate_design(n, p, seed), theta0, seed);
    MeanFieldState fit;
    try {
        fit = cavi_fit(inst, prior, opt);
    } catch (const OptimizationError& e) {
        throw NumericalError(std::string(e.what()) + " after " + std::to_string(e.state().sweeps) + " sweeps");
    }
    const Eigen::Map<const Eigen::VectorXd> th(theta0.data(), p);
    double min_inc = INFINITY;
    for (std::size_t k = 1; k < fit.elbo_trace.size(); ++k)
        min_inc = std::min(min_inc, fit.elbo_trace[k] - fit.elbo_trace[k - 1]);
    return {(fit.mean() - th).norm(), fit.gamma.sum(), fit.elbo_trace.back(), double(fit.sweeps), min_inc,
            fit.converged ? 1.0 : 0.0};
}

std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t salt, std::uint64_t r)
{
    return mix64(mix64(seed ^ mix64(salt)) + r);
}

ExperimentResult run_vb_fit(const ExperimentConfig& c)
{
    ExperimentResult r;
    r.table.header = {"replicate", "l2_error", "sum_gamma", "elbo", "sweeps", "min_elbo_increment", "converged"};
    const long long n = c.integer("n");
    const auto runs = parallel_map(static_cast<std::size_t>(c.replicates), c.workers, [&](std::size_t i) {
        return vb_replicate(n, c, replicate_seed(c.seed, static_cast<std::uint64_t>(n), i));
    });
    std::vector<double> errors;
    double worst = INFINITY;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const VbRun& v = runs[i];
        r.table.rows.push_back({double(i), v.l2_error, v.sum_gamma, v.elbo, v.sweeps, v.min_increment, v.converged});
        errors.push_back(v.l2_error);
        worst = std::min(worst, v.min_increment);
    }
    r.summary["median_l2_error"] = median(errors);
    r.summary["min_elbo_increment"] = worst;
    return r;
}

ExperimentResult run_vb_scaling(const ExperimentConfig& c)
{
    ExperimentResult r;
    r.table.header = {"n", "median_l2_error", "mean_l2_error", "se", "replicates"};
    std::vector<double> lx, ly;
    for (long long n : integer_list(c, "n")) {
        const auto runs = parallel_map(static_cast<std::size_t>(c.replicates), c.workers, [&](std::size_t i) {
            return vb_replicate(n, c, replicate_seed(c.seed, static_cast<std::uint64_t>(n), i)).l2_error;
        });
        const RiskEstimate est = summarize(runs, c.seed);
        const double med = median(runs);
        r.table.rows.push_back({double(n), med, est.mean, est.mc_std_error, double(c.replicates)});
        lx.push_back(std::log(double(n)));
        ly.push_back(std::log(med));
    }
    r.summary["slope"] = least_squares_slope(lx, ly);
    r.summary["predicted_slope"] = -0.5;
    return r;
}

ExperimentResult run_mmle(const ExperimentConfig& c)
{
    ExperimentResult r;
    r.table.header = {"n", "median_alpha_hat", "mean_alpha_hat", "se", "lower_boundary", "upper_boundary",
                      "replicates"};
    const long long s = c.integer("s");
    const double b = c.number_or("b", 0.0);
    const SlabSpec slab = slab_from(c);
    for (long long n : integer_list(c, "n")) {
        SignalConfig sc;
        sc.n = n;
        sc.s = s;
        sc.b.assign(static_cast<std::size_t>(s), b);
        const auto fits = parallel_map(static_cast<std::size_t>(c.replicates), c.workers, [&](std::size_t i) {
            Rng rng = derive_stream(c.seed, i);
            const SignalDraw d = draw_signal(sc, rng);
            return mmle_alpha(MarginalLikelihood(d.x, slab));
        });
        std::vector<double> alphas;
        double lower = 0.0, upper = 0.0;
        for (const MmleResult& f : fits) {
            alphas.push_back(f.alpha);
            lower += f.at_lower;
            upper += f.at_upper;
        }
        const RiskEstimate est = summarize(alphas, c.seed);
        r.table.rows.push_back({double(n), median(alphas), est.mean, est.mc_std_error, lower, upper,
                                double(c.replicates)});
        if (upper > 0.0)
            r.warnings.push_back("alpha-hat reached the upper boundary 1 in " + format_number(upper) +
                                 " replicates at n = " + std::to_string(n));
    }
    return r;
}

using Checker = std::function<void(const ExperimentConfig&, std::vector<std::string>&)>;
using Runner = std::function<ExperimentResult(const ExperimentConfig&)>;

const std::map<std::string, std::pair<Checker, Runner>>& dispatch()
{
    static const std::map<std::string, std::pair<Checker, Runner>> table = {
        {"risk-boundary", {check_risk_boundary, run_risk_boundary}},
        {"lower-bound", {check_lower_bound, run_lower_bound}},
        {"bayes-fdr", {check_bayes_fdr, run_bayes_fdr}},
        {"contraction", {check_contraction, run_contraction}},
        {"coverage", {check_coverage, run_coverage}},
        {"vb-fit", {[](const ExperimentConfig& c, std::vector<std::string>&) { check_vb(c, false); }, run_vb_fit}},
        {"vb-scaling",
         {[](const ExperimentConfig& c, std::vector<std::string>&) { check_vb(c, true); }, run_vb_scaling}},
        {"mmle", {check_mmle, run_mmle}},
    };
    return table;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& experiment_kinds()
{
    static const std::vector<std::string> kinds = {"risk-boundary", "lower-bound", "bayes-fdr", "contraction",
                                                   "coverage",      "vb-fit",      "vb-scaling", "mmle"};
    return kinds;
}

double ExperimentConfig::number(const std::string& key) const
{
    const auto it = params.find(key);
    if (it == params.end()) throw ConfigError(key, "required parameter is missing");
    return parse_number(key, it->second);
}

double ExperimentConfig::number_or(const std::string& key, double fallback) const
{
    return has(key) ? number(key) : fallback;
}

long long ExperimentConfig::integer(const std::string& key) const
{
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError(key, "expected an integer");
    return static_cast<long long>(v);
}

long long ExperimentConfig::integer_or(const std::string& key, long long fallback) const
{
    return has(key) ? integer(key) : fallback;
}

std::vector<double> ExperimentConfig::numbers(const std::string& key) const
{
    const auto it = params.find(key);
    if (it == params.end()) throw ConfigError(key, "required parameter is missing");
    std::vector<double> out;
    for (const std::string& item : split(it->second, ',')) out.push_back(parse_number(key, item));
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
}

std::string ExperimentConfig::text_or(const std::string& key, const std::string& fallback) const
{
    const auto it = params.find(key);
    return it == params.end() ? fallback : trim(it->second);
}

void apply_setting(ExperimentConfig& config, const std::string& key_raw, const std::string& value_raw)
{
    const std::string key = trim(key_raw);
    const std::string value = trim(value_raw);
    if (key.empty()) throw ConfigError("config", "empty key");
    if (key == "seed") {
        std::uint64_t seed = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
        if (ec != std::errc() || ptr != value.data() + value.size())
            throw ConfigError("seed", "expected an unsigned 64-bit integer");
        config.seed = seed;
    } else if (key == "reps") {
        const double v = parse_number("reps", value);
        if (v < 1.0 || v != std::floor(v)) throw ConfigError("reps", "expected a positive integer");
        config.replicates = static_cast<long>(v);
    } else if (key == "out") {
        config.out = value;
    } else if (key == "workers") {
        const double v = parse_number("workers", value);
        if (v < 1.0 || v != std::floor(v)) throw ConfigError("workers", "expected a positive integer");
        config.workers = static_cast<unsigned>(v);
    } else if (key == "kind") {
        config.kind = value;
    } else {
        config.params[key] = value;
    }
}

void apply_override(ExperimentConfig& config, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError(assignment, "override must have the form key=value");
    apply_setting(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void load_config_file(ExperimentConfig& config, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config", path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    }
}

ValidationReport validate(const ExperimentConfig& config)
{
    ValidationReport report;
    const auto it = dispatch().find(config.kind);
    if (it == dispatch().end()) {
        report.errors.push_back({"kind", "unknown experiment kind '" + config.kind + "'"});
        return report;
    }
    const auto& allowed = allowed_keys().at(config.kind);
    for (const auto& [key, value] : config.params)
        if (!allowed.count(key)) report.errors.push_back({key, "unknown parameter for " + config.kind});
    if (!report.ok()) return report;
    try {
        it->second.first(config, report.warnings);
    } catch (const ConfigError& e) {
        report.errors.push_back({e.field(), std::string(e.what()).substr(e.field().size() + 2)});
    } catch (const std::domain_error& e) {
        report.errors.push_back({"config", e.what()});
    }
    return report;
}

ExperimentResult run(const ExperimentConfig& config)
{
    const ValidationReport report = validate(config);
    if (!report.ok()) throw ConfigError(report.errors.front().field, report.errors.front().message);
    ExperimentResult result;
    try {
        result = dispatch().at(config.kind).second(config);
    } catch (const ConfigError&) {
        throw;
    } catch (const NumericalError&) {
        throw;
    } catch (const std::exception& e) {
        throw NumericalError(e.what());
    }
    result.warnings.insert(result.warnings.begin(), report.warnings.begin(), report.warnings.end());
    for (const auto& row : result.table.rows)
        for (double v : row)
            if (std::isnan(v)) throw NumericalError("non-finite value in the result table");
    return result;
}

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

std::string to_csv(const ResultTable& table)
{
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + table.header[i];
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
        out += '\n';
    }
    return out;
}

nlohmann::ordered_json summary_json(const ExperimentConfig& config, const ExperimentResult& result,
                                    double wall_seconds)
{
    nlohmann::ordered_json j;
    j["experiment"] = config.kind;
    j["version"] = kVersion;
    j["seed"] = config.seed;
    j["replicates"] = config.replicates;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config.params) params[k] = v;
    j["config"] = params;
    j["columns"] = result.table.header;
    j["rows"] = result.table.rows.size();
    j["summary"] = result.summary;
    j["warnings"] = result.warnings;
    j["wall_seconds"] = wall_seconds;
    return j;
}

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result, double wall_seconds)
{
    const std::filesystem::path base(config.out);
    if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
    std::ofstream csv(config.out + ".csv", std::ios::binary);
    csv << to_csv(result.table);
    std::ofstream json(config.out + ".json", std::ios::binary);
    json << summary_json(config, result, wall_seconds).dump(2) << '\n';
    if (!csv || !json) throw std::runtime_error("failed to write outputs under " + config.out);
}

}  // namespace sbayes
