// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

namespace deba {

/// FIFO of reals with an optional capacity. Pushing into a full window evicts
/// the oldest value.
class WindowStats {
 public:
  WindowStats() = default;
  explicit WindowStats(std::optional<std::size_t> capacity)
      : capacity_(capacity) {}

  static WindowStats bounded(std::size_t capacity) {
    return WindowStats(capacity);
  }
  static WindowStats unbounded() { return WindowStats(std::nullopt); }

  void push(double value);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::optional<std::size_t> capacity() const noexcept { return capacity_; }
  const std::deque<double>& values() const noexcept { return values_; }
  std::vector<double> to_vector() const {
    return {values_.begin(), values_.end()};
  }

  /// Median of the current contents; throws EmptyWindow when empty.
  double median() const;

  bool operator==(const WindowStats&) const = default;

 private:
  std::optional<std::size_t> capacity_;
  std::deque<double> values_;
};

}  // namespace deba
