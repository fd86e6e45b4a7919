// SPDX-License-Identifier: MIT
// Index-subsampling helpers shared by the integration modules.

#pragma once

#include <cstddef>
#include <vector>

namespace pqvar::detail {

/// Index subsampling with m intervals of an n-point grid, plus forced indices.
std::vector<std::size_t> subsample(std::size_t n, std::size_t m,
                                   const std::vector<std::size_t>& forced);

/// Schedule entries coarser than an n-point grid, then the full grid (n - 1).
std::vector<std::size_t> sampled_levels(std::size_t n, const std::vector<std::size_t>& schedule);

/// Positions of `points` in the sorted grid `xs`; throws unless all are present.
std::vector<std::size_t> grid_indices_of(const std::vector<double>& xs,
                                         const std::vector<double>& points);

}  // namespace pqvar::detail
