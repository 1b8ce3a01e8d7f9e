#include "fve/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "fve/error.hpp"

namespace fve {

std::size_t worker_count() {
  if (const char* env = std::getenv("FVE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t workers) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::atomic<std::size_t> next{0};
  std::mutex guard;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (k < failed_index) {
          failed_index = k;
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<ReplicateSummary> run_replicates(std::size_t n, std::uint64_t master_seed,
                                             const std::function<ReplicateSummary(std::size_t, Rng&)>& fn,
                                             std::size_t workers) {
  std::vector<ReplicateSummary> out(n);
  parallel_for(
      n,
      [&](std::size_t k) {
        Rng rng = Rng::for_replicate(master_seed, k);
        try {
          out[k] = fn(k, rng);
        } catch (const std::exception& e) {
          out[k] = ReplicateSummary{};
          out[k].failed = true;
          out[k].failure = e.what();
        }
        out[k].index = k;
      },
      workers);
  const auto failures = static_cast<std::size_t>(
      std::count_if(out.begin(), out.end(), [](const ReplicateSummary& r) { return r.failed; }));
  if (failures * 100 > n) {
    const auto first = std::find_if(out.begin(), out.end(), [](const ReplicateSummary& r) { return r.failed; });
    throw RunFailed(std::to_string(failures) + " of " + std::to_string(n) +
                    " replicates failed (limit 1%); first failure: " + first->failure);
  }
  return out;
}

std::map<std::string, Estimate> pool(std::span<const ReplicateSummary> replicates) {
  std::vector<const ReplicateSummary*> order;
  for (const auto& r : replicates) {
    if (!r.failed) order.push_back(&r);
  }
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->index < b->index; });
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> columns;
  for (const ReplicateSummary* r : order) {
    for (const auto& [key, value] : r->values) {
      auto& col = columns[key];
      col.first.push_back(value);
      col.second.push_back(r->weight);
    }
  }
  std::map<std::string, Estimate> out;
  for (const auto& [key, col] : columns) out[key] = weighted_estimate_of(col.first, col.second);
  return out;
}

}  // namespace fve
