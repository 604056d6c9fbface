// SPDX-License-Identifier: Apache-2.0
#include "deba/window.hpp"

#include "deba/error.hpp"
#include "deba/stats.hpp"

namespace deba {

void WindowStats::push(double value) {
  if (capacity_ && *capacity_ == 0) return;
  if (capacity_ && values_.size() == *capacity_) values_.pop_front();
  values_.push_back(value);
}

double WindowStats::median() const {
  if (values_.empty()) throw Error(Errc::EmptyWindow, "median of empty window");
  const std::vector<double> copy(values_.begin(), values_.end());
  return stats::median(copy);
}

}  // namespace deba
