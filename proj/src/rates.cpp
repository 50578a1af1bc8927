#include "mdq/rates.hpp"

#include "mdq/error.hpp"

#include <cmath>
#include <string>

namespace mdq {

OrderFit estimate_order(std::span<const std::pair<double, double>> data) {
    if (data.size() < 3) throw DataError("order fit needs at least three levels, got " + std::to_string(data.size()));
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [h, e] : data) {
        if (!(h > 0.0) || !(e > 0.0)) {
            throw DataError("order fit needs positive h and e, got (" + std::to_string(h) + ", " + std::to_string(e) +
                            ")");
        }
        const double x = std::log(h);
        const double y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(data.size());
    const double den = n * sxx - sx * sx;
    if (den <= 0.0) throw DataError("order fit needs distinct h values");
    OrderFit fit;
    fit.slope = (n * sxy - sx * sy) / den;
    for (std::size_t i = 1; i < data.size(); ++i) {
        fit.pair_slopes.push_back(std::log(data[i].second / data[i - 1].second) /
                                  std::log(data[i].first / data[i - 1].first));
    }
    return fit;
}

}  // namespace mdq
