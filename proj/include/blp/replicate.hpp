#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "blp/rng.hpp"

namespace blp {

inline constexpr const char* kThreadsEnv = "BLP_THREADS";

/// Thread count after applying the BLP_THREADS override; at least 1.
inline int resolve_threads(int requested) {
  if (const char* env = std::getenv(kThreadsEnv); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw std::invalid_argument(std::string(kThreadsEnv) + " must be a positive integer, got '" + env + "'");
    }
    return static_cast<int>(std::min<long>(v, 1024));
  }
  return std::max(requested, 1);
}

template <class R>
struct Replicated {
  std::vector<std::optional<R>> results;  ///< by replication index; empty on failure
  std::size_t failures = 0;
  std::string first_failure;

  std::vector<R> successes() const {
    std::vector<R> out;
    out.reserve(results.size() - failures);
    for (const auto& r : results) {
      if (r) out.push_back(*r);
    }
    return out;
  }
};

/// Runs fn(rng, index) for index in [0, n). Replication i always draws from
/// seed_stream(master_seed, stream_base + i), so results do not depend on the
/// number of threads. Runtime errors mark a single replication as failed;
/// anything else aborts the batch.
template <class R, class F>
Replicated<R> replicate(std::size_t n, std::uint64_t master_seed, std::uint64_t stream_base, int threads, F&& fn) {
  Replicated<R> out;
  out.results.resize(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        Rng rng = seed_stream(master_seed, stream_base + i);
        out.results[i] = fn(rng, i);
      } catch (const std::runtime_error& e) {
        errors[i] = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const int count = std::clamp<int>(threads, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < count; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (fatal) std::rethrow_exception(fatal);
  for (std::size_t i = 0; i < n; ++i) {
    if (out.results[i]) continue;
    if (out.failures++ == 0) out.first_failure = errors[i];
  }
  return out;
}

}  // namespace blp
