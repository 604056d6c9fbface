// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace deba::stats {

// All helpers throw Error(EmptyInput) on an empty span.

double mean(std::span<const double> values);

/// Population standard deviation (divides by n).
double population_std(std::span<const double> values);

/// Median; even lengths average the two central order statistics.
double median(std::span<const double> values);

/// Quantile with linear interpolation between closest ranks:
/// h = (n - 1) q, result = x[floor(h)] + (h - floor(h)) (x[floor(h)+1] - x[floor(h)]).
double quantile(std::span<const double> values, double q);

}  // namespace deba::stats
