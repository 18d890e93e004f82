#include "seirios/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace seirios::harness {

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw std::domain_error("percentile: empty sample");
    if (p < 0.0 || p > 100.0) throw std::domain_error("percentile: p outside [0, 100]");
    std::sort(values.begin(), values.end());
    const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(values.size() - 1, lo + 1);
    const double w = rank - static_cast<double>(lo);
    return values[lo] * (1.0 - w) + values[hi] * w;
}

std::vector<std::pair<double, double>> cdf_points(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out.emplace_back(values[i], static_cast<double>(i + 1) / values.size());
    return out;
}

double min_angle_error(const std::vector<double>& estimates_deg, double truth_deg) {
    double best = std::numeric_limits<double>::infinity();
    for (double e : estimates_deg) best = std::min(best, std::abs(e - truth_deg));
    return best;
}

std::vector<double> assignment_errors(const std::vector<double>& truths_deg,
                                      const std::vector<double>& estimates_deg) {
    const std::size_t n = truths_deg.size();
    std::vector<double> best_errors(n, std::numeric_limits<double>::infinity());
    if (n == 0) return best_errors;

    // Estimate lists are at most 6 long here, so enumerating assignments
    // beats carrying a Hungarian implementation.
    std::vector<int> pick(estimates_deg.size());
    std::iota(pick.begin(), pick.end(), 0);
    double best_total = std::numeric_limits<double>::infinity();

    auto evaluate = [&]() {
        double total = 0.0;
        std::vector<double> errors(n, std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < n && i < pick.size(); ++i) {
            errors[i] = std::abs(truths_deg[i] - estimates_deg[pick[i]]);
            total += errors[i];
        }
        // Each missing match counts as a fixed large penalty so fuller
        // assignments win.
        total += 1e6 * static_cast<double>(n > pick.size() ? n - pick.size() : 0);
        if (total < best_total) {
            best_total = total;
            best_errors = errors;
        }
    };

    if (pick.empty()) return best_errors;
    do {
        evaluate();
    } while (std::next_permutation(pick.begin(), pick.end()));
    return best_errors;
}

}  // namespace seirios::harness
