// SPDX-License-Identifier: Apache-2.0
#include "deba/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "deba/error.hpp"

namespace deba::stats {
namespace {

void require_values(std::span<const double> values, const char* what) {
  if (values.empty()) {
    throw Error(Errc::EmptyInput, std::string(what) + " of an empty sequence");
  }
}

}  // namespace

double mean(std::span<const double> values) {
  require_values(values, "mean");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
  require_values(values, "standard deviation");
  // Work on offsets from the first value so a constant sequence gives exactly
  // zero instead of the rounding residue of its mean.
  const double pivot = values.front();
  double shift = 0.0;
  for (double v : values) shift += v - pivot;
  shift /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) {
    const double d = (v - pivot) - shift;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(values.size()));
}

double median(std::span<const double> values) {
  require_values(values, "median");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return (lower + upper) / 2.0;
}

double quantile(std::span<const double> values, double q) {
  require_values(values, "quantile");
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(Errc::InvalidValue, "quantile level outside [0, 1]");
  }
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = static_cast<double>(v.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

}  // namespace deba::stats
