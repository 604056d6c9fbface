// Shared fixtures for the unit tests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "../oracles.hpp"
#include "deba/error.hpp"
#include "deba/types.hpp"

namespace testing {

inline std::optional<deba::Errc> errc_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const deba::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline deba::EpochRecord rec(std::int64_t epoch, double loss, double norm,
                             double variance) {
  return {epoch, loss, deba::PrecomputedStats{norm, variance}};
}

inline std::vector<deba::EpochRecord> to_records(
    const std::vector<oracle::SimEpoch>& trace) {
  std::vector<deba::EpochRecord> out;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    out.push_back(rec(static_cast<std::int64_t>(t), trace[t].loss,
                      trace[t].norm, trace[t].variance));
  }
  return out;
}

inline oracle::SimConfig to_sim(const deba::SchedulerConfig& c) {
  oracle::SimConfig s{c.theta_stab, c.theta_conf};
  s.alpha_grow = c.alpha_grow;
  s.alpha_roll = c.alpha_roll;
  s.b_min = c.b_min;
  s.b_max = c.b_max;
  s.cooldown = c.cooldown_epochs;
  s.window = c.stats_mode == deba::StatsMode::FullHistory
                 ? 0
                 : static_cast<std::size_t>(c.window_len);
  s.eps = c.epsilon;
  return s;
}

inline deba::SchedulerConfig thresholds(double stab, double conf) {
  deba::SchedulerConfig c;
  c.theta_stab = stab;
  c.theta_conf = conf;
  return c;
}

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(DEBA_TEST_DATA_DIR) / name;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  path_ = std::filesystem::temp_directory_path() /
          ("deba-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

}  // namespace testing
