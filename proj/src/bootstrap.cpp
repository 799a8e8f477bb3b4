#include "sufaudit/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "sufaudit/errors.hpp"

namespace sufaudit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Total order on doubles with NaN last.
bool less_value(double a, double b) {
  if (std::isnan(a)) return false;
  if (std::isnan(b)) return true;
  return a < b;
}

// Canonical row order: lexicographic over all columns (unit id first when set).
std::vector<std::size_t> canonical_rows(const Dataset& data) {
  std::vector<const Column*> cols;
  if (data.unit_id()) cols.push_back(&data.column(*data.unit_id()));
  for (const auto& n : data.names()) cols.push_back(&data.column(n));
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (const Column* c : cols) {
      const double va = c->values[a];
      const double vb = c->values[b];
      if (less_value(va, vb)) return true;
      if (less_value(vb, va)) return false;
    }
    return false;
  });
  return order;
}

double quantile_sorted(const std::vector<double>& v, double p) {
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return splitmix64(splitmix64(a) ^ b); }

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

BootstrapInterval bootstrap_interval(const Statistic& statistic, const Dataset& data, const BootstrapOptions& opt) {
  if (opt.reps < 1) throw EstimationError("bootstrap needs at least one replicate");
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw EstimationError("bootstrap alpha must lie in (0, 1)");
  if (data.rows() == 0) throw EstimationError("bootstrap on an empty dataset");

  // Units: clusters of canonical rows sharing a unit id, or single rows.
  const std::vector<std::size_t> order = canonical_rows(data);
  std::vector<std::vector<std::size_t>> units;
  if (data.unit_id()) {
    const auto& id = data.column(*data.unit_id()).values;
    for (std::size_t r : order) {
      if (units.empty() || !(id[units.back().front()] == id[r])) units.emplace_back();
      units.back().push_back(r);
    }
  } else {
    units.reserve(order.size());
    for (std::size_t r : order) units.push_back({r});
  }

  std::vector<double> values(opt.reps, 0.0);
  std::vector<char> ok(opt.reps, 0);
  auto run = [&](std::size_t rep) {
    std::mt19937_64 rng(mix_seed(opt.seed, rep));
    std::uniform_int_distribution<std::size_t> pick(0, units.size() - 1);
    std::vector<std::size_t> rows;
    rows.reserve(data.rows());
    for (std::size_t k = 0; k < units.size(); ++k) {
      const auto& u = units[pick(rng)];
      rows.insert(rows.end(), u.begin(), u.end());
    }
    try {
      const double v = statistic(data.select_rows(rows));
      if (std::isfinite(v)) {
        values[rep] = v;
        ok[rep] = 1;
      }
    } catch (const std::exception&) {
      // Counted as a failed replicate below.
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(opt.reps)));
  if (workers == 1) {
    for (std::size_t r = 0; r < opt.reps; ++r) run(r);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < opt.reps; r += workers) run(r);
      });
    }
  }

  std::vector<double> good;
  good.reserve(opt.reps);
  for (std::size_t r = 0; r < opt.reps; ++r) {
    if (ok[r]) good.push_back(values[r]);
  }
  BootstrapInterval out;
  out.succeeded = good.size();
  out.failed = opt.reps - good.size();
  if (good.empty() || static_cast<double>(out.failed) > opt.max_failure_share * static_cast<double>(opt.reps)) {
    throw EstimationError("bootstrap: " + std::to_string(out.failed) + " of " + std::to_string(opt.reps) +
                          " replicates failed");
  }
  std::sort(good.begin(), good.end());
  out.low = quantile_sorted(good, opt.alpha / 2.0);
  out.high = quantile_sorted(good, 1.0 - opt.alpha / 2.0);
  return out;
}

void attach_interval(Estimate& e, const BootstrapInterval& ci) {
  e.ci_low = std::min(ci.low, e.value);
  e.ci_high = std::max(ci.high, e.value);
  e.bootstrap_reps = ci.succeeded;
  e.bootstrap_failed = ci.failed;
}

}  // namespace sufaudit
