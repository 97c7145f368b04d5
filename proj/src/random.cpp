#include "sbayes/random.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace sbayes {

std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, Rng& rng)
{
    if (k > n) throw std::domain_error("random_subset: k > n");
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(2 * k);
    for (std::size_t j = n - k; j < n; ++j) {
        const std::size_t t = std::uniform_int_distribution<std::size_t>{0, j}(rng);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::size_t> out(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace sbayes
