#pragma once

#include <span>
#include <utility>
#include <vector>

namespace mdq {

struct OrderFit {
    double slope = 0.0;
    /// Slopes between successive levels.
    std::vector<double> pair_slopes;
};

/// Least-squares slope of log e against log h over (h, e) pairs. Needs at
/// least three levels; non-positive h or e throws DataError.
OrderFit estimate_order(std::span<const std::pair<double, double>> data);

}  // namespace mdq
