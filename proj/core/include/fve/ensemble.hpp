#pragma once

// Replicate-level parallelism and pooling.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fve/random.hpp"
#include "fve/stats.hpp"

namespace fve {

/// FVE_WORKERS if set to a positive integer, else the hardware concurrency.
std::size_t worker_count();

/// Calls fn(k) for k in [0, n) on up to `workers` threads. After all calls
/// finish, rethrows the exception of the lowest failing index, if any.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t workers = worker_count());

/// parallel_for collecting one result per index, in index order.
template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn,
                            std::size_t workers = worker_count()) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t k) { out[k] = fn(k); }, workers);
  return out;
}

struct ReplicateSummary {
  std::size_t index = 0;
  double weight = 1.0;  // total mass of the measure the values refer to
  bool failed = false;
  std::string failure;
  std::map<std::string, double> values;
};

/// Runs fn(k, rng_k) with rng_k = Rng::for_replicate(master_seed, k). An
/// exception marks the replicate failed; the run throws RunFailed when more
/// than 1% of replicates fail.
std::vector<ReplicateSummary> run_replicates(std::size_t n, std::uint64_t master_seed,
                                             const std::function<ReplicateSummary(std::size_t, Rng&)>& fn,
                                             std::size_t workers = worker_count());

/// Weight-averaged estimate per key over the non-failed replicates, summed in
/// replicate-index order so that the result does not depend on input order.
std::map<std::string, Estimate> pool(std::span<const ReplicateSummary> replicates);

}  // namespace fve
