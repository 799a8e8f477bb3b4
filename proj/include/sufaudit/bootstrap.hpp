#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>

#include "sufaudit/dataset.hpp"
#include "sufaudit/estimators.hpp"

namespace sufaudit {

struct BootstrapOptions {
  std::size_t reps = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  /// Worker threads; results do not depend on this.
  unsigned threads = 1;
  /// Replicates whose statistic throws are dropped; more than this share is an error.
  double max_failure_share = 0.10;
};

struct BootstrapInterval {
  double low = 0.0;
  double high = 0.0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

using Statistic = std::function<double(const Dataset&)>;

/// Percentile interval from nonparametric resampling of units with
/// replacement. Units are rows, or clusters of rows sharing a unit id when the
/// dataset declares one. Rows are put into a canonical order before
/// resampling, so the interval depends only on the multiset of units and the
/// seed. Replicate r draws from its own stream derived from (seed, r).
BootstrapInterval bootstrap_interval(const Statistic& statistic, const Dataset& data, const BootstrapOptions& options);

/// Attach a bootstrap interval to `estimate`, widening it to contain the
/// point value.
void attach_interval(Estimate& estimate, const BootstrapInterval& interval);

/// 64-bit mixer used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// FNV-1a hash of a name, stable across platforms and runs.
std::uint64_t stable_hash(std::string_view text);

}  // namespace sufaudit
