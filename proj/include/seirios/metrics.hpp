#pragma once

#include <utility>
#include <vector>

namespace seirios::harness {

// p in [0, 100]; linear interpolation of the empirical CDF.
// Throws std::domain_error on empty input.
double percentile(std::vector<double> values, double p);

inline double median(std::vector<double> values) { return percentile(std::move(values), 50.0); }

// Empirical CDF support points: (sorted value, (i + 1) / n).
std::vector<std::pair<double, double>> cdf_points(std::vector<double> values);

// Distance from the truth angle to the closest estimate (degrees).
double min_angle_error(const std::vector<double>& estimates_deg, double truth_deg);

// Per-truth absolute errors under the optimal one-to-one assignment of
// estimates to truths (minimum total angular error). Unmatched truths get
// an infinite error when there are fewer estimates than truths.
std::vector<double> assignment_errors(const std::vector<double>& truths_deg,
                                      const std::vector<double>& estimates_deg);

}  // namespace seirios::harness
