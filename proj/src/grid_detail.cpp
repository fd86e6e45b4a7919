// SPDX-License-Identifier: MIT

#include "grid_detail.hpp"

#include <algorithm>
#include <cmath>

#include "pqvar/common.hpp"

namespace pqvar::detail {

std::vector<std::size_t> subsample(std::size_t n, std::size_t m,
                                   const std::vector<std::size_t>& forced) {
    std::vector<std::size_t> idx;
    idx.reserve(m + 1 + forced.size());
    const std::size_t last = n - 1;
    for (std::size_t k = 0; k <= m; ++k) {
        idx.push_back(static_cast<std::size_t>(
            std::llround(static_cast<double>(k) * static_cast<double>(last) / static_cast<double>(m))));
    }
    idx.insert(idx.end(), forced.begin(), forced.end());
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

std::vector<std::size_t> sampled_levels(std::size_t n, const std::vector<std::size_t>& schedule) {
    std::vector<std::size_t> out;
    for (std::size_t m : schedule) {
        if (m >= 1 && m < n - 1) {
            out.push_back(m);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    out.push_back(n - 1);
    return out;
}

std::vector<std::size_t> grid_indices_of(const std::vector<double>& xs,
                                         const std::vector<double>& points) {
    std::vector<std::size_t> out;
    for (double p : points) {
        const auto it = std::lower_bound(xs.begin(), xs.end(), p);
        if (it == xs.end() || *it != p) {
            throw InputError("required point is not a grid point");
        }
        out.push_back(static_cast<std::size_t>(it - xs.begin()));
    }
    return out;
}

}  // namespace pqvar::detail
