#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace mvcontract {

/// A Monte-Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// length of the input, so the result is independent of how the values
/// were produced.
inline double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 64;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// Sample mean with standard error s/sqrt(n) (two-pass sample variance).
inline Estimate mean_estimate(std::span<const double> samples) {
  const auto n = static_cast<double>(samples.size());
  if (samples.empty()) return {};
  const double mean = pairwise_sum(samples) / n;
  if (samples.size() < 2) return {mean, 0.0};
  std::vector<double> sq(samples.size());
  std::transform(samples.begin(), samples.end(), sq.begin(),
                 [mean](double v) { return (v - mean) * (v - mean); });
  const double var = pairwise_sum(sq) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

/// Unbiased sample variance. The standard error uses the delta method with
/// the fourth central moment: Var(s²) ≈ (m4 − (n−3)/(n−1)·σ⁴)/n.
inline Estimate variance_estimate(std::span<const double> samples) {
  const std::size_t count = samples.size();
  if (count < 2) return {};
  const auto n = static_cast<double>(count);
  const double mean = pairwise_sum(samples) / n;
  std::vector<double> d2(count), d4(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double d = samples[i] - mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = pairwise_sum(d2) / n;
  const double m4 = pairwise_sum(d4) / n;
  const double var = m2 * n / (n - 1.0);
  const double var_of_var = (m4 - (n - 3.0) / (n - 1.0) * var * var) / n;
  return {var, std::sqrt(std::max(var_of_var, 0.0))};
}

/// Number of worker threads to use when the caller passes 0.
inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs body(begin, end) over a static block partition of [0, n).
/// Exceptions from workers are rethrown on the caller's thread; when several
/// blocks fail, the one covering the lowest index wins so that error
/// reporting does not depend on scheduling.
inline void parallel_for(std::size_t n, unsigned workers,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mvcontract
