#pragma once

// Test-only oracle for the expectiled value, independent of the library's
// solver paths: the balance gap restricted to a segment between consecutive
// distinct values is linear, so scan segments and solve each linear equation
// directly.

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace testsupport {

inline double oracle_expectile(const std::vector<double>& values,
                               const std::vector<double>& probs, double beta) {
    std::vector<double> d = values;
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    if (d.size() == 1) return d[0];

    for (std::size_t j = 0; j + 1 < d.size(); ++j) {
        // gap(v) = sum_{u > d_j} p (u - v) - (1+beta) sum_{u <= d_j} p (v - u)
        double slope = 0.0, intercept = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] >= d[j + 1]) {
                intercept += probs[i] * values[i];
                slope += probs[i];
            } else {
                intercept += (1.0 + beta) * probs[i] * values[i];
                slope += (1.0 + beta) * probs[i];
            }
        }
        const double root = intercept / slope;
        if (root >= d[j] && root <= d[j + 1]) return root;
    }
    throw std::logic_error("oracle: no segment contained the balance root");
}

} // namespace testsupport
