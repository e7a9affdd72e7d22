#pragma once

#include <cmath>

namespace clickdet::num {

// Overflow-free logistic function.
inline double stable_sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Logistic loss -[y ln p + (1-y) ln(1-p)] written in terms of the logit z,
// stable for any magnitude of z.
inline double logistic_loss(double z, int y) {
    const double yz = static_cast<double>(y) * z;
    if (z > 0.0) {
        return z - yz + std::log1p(std::exp(-z));
    }
    return std::log1p(std::exp(z)) - yz;
}

} // namespace clickdet::num
