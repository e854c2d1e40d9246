#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace ddm {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child stream seed for (master, index). Order independent, so replications
// can run in any order or thread.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index ^ 0x6a09e667f3bcc908ULL));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

// Thread count: explicit value, else DDM_THREADS, else hardware concurrency.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DDM_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs f(i) for i in [0, n). Work is handed out by an atomic counter; callers
// write results into slot i so the reduction order never depends on timing.
template <class F>
void parallel_for(Index n, unsigned threads, F&& f) {
  unsigned t = std::min<unsigned>(resolve_threads(threads),
                                  static_cast<unsigned>(std::max<Index>(n, 1)));
  if (t <= 1) {
    for (Index i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      Index i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned k = 0; k < t; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Reverse cumulative sums: out[I] = sum_{i > I} v_i for I = 0..n (1-based i).
template <class Derived>
Vector tail_sums(const Eigen::DenseBase<Derived>& v) {
  const Index n = v.size();
  Vector out(n + 1);
  out(n) = 0.0;
  for (Index i = n - 1; i >= 0; --i) out(i) = out(i + 1) + v(i);
  return out;
}

// Forward cumulative sums: out[I] = sum_{i <= I} v_i for I = 0..n.
template <class Derived>
Vector prefix_sums(const Eigen::DenseBase<Derived>& v) {
  const Index n = v.size();
  Vector out(n + 1);
  out(0) = 0.0;
  for (Index i = 0; i < n; ++i) out(i + 1) = out(i) + v(i);
  return out;
}

}  // namespace ddm
