#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>

namespace mdq {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double positive_part(double v) { return v > 0.0 ? v : 0.0; }
inline double negative_part(double v) { return v < 0.0 ? -v : 0.0; }

inline Point scalar_point(double v) {
    Point p(1);
    p[0] = v;
    return p;
}

}  // namespace mdq
