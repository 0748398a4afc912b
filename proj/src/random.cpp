#include "hetforest/random.hpp"

#include <algorithm>

namespace hetforest {

std::vector<int> sample_without_replacement(int n, int k, SplitMix64& rng) {
    if (k >= n) {
        std::vector<int> all(n);
        for (int i = 0; i < n; ++i) all[i] = i;
        return all;
    }
    // Partial Fisher-Yates over the index range.
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    std::vector<int> out(k);
    for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[i], pool[j]);
        out[i] = pool[i];
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace hetforest
