#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace sbayes {

// Monte Carlo mean with plug-in standard error sd / sqrt(replicates).
struct RiskEstimate {
    double mean = 0.0;
    double mc_std_error = 0.0;
    long replicates = 0;
    std::uint64_t seed = 0;
};

// Values are accumulated in index order so the result is reproducible.
inline RiskEstimate summarize(std::span<const double> values, std::uint64_t seed)
{
    RiskEstimate r;
    r.replicates = static_cast<long>(values.size());
    r.seed = seed;
    if (values.empty()) return r;
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        const double var = ss / static_cast<double>(values.size() - 1);
        r.mc_std_error = std::sqrt(var / static_cast<double>(values.size()));
    }
    return r;
}

}  // namespace sbayes
