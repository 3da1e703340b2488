#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mrlab {

/// Thrown when an iterative solver exhausts its budget; carries the last
/// relative residual so callers can report how close the solve got.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what + " (relative residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Thrown when a declared model assumption fails its sampling check.
class AssumptionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Global worker budget for the few hot loops that parallelize.  Defaults to
/// the hardware count; the CLI overrides it via --threads.
inline int& thread_budget() {
  static int budget = std::max(1u, std::thread::hardware_concurrency());
  return budget;
}

inline void set_thread_budget(int n) { thread_budget() = std::max(1, n); }

/// Runs fn(begin, end) over [0, n) split into a fixed number of chunks.  The
/// chunk layout depends only on n, never on the thread budget, so per-chunk
/// reductions can be combined in index order and results stay bit-identical
/// for any --threads value.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t n_chunks, Fn&& fn) {
  if (n == 0) return;
  n_chunks = std::max<std::size_t>(1, std::min(n_chunks, n));
  const std::size_t chunk = (n + n_chunks - 1) / n_chunks;
  const int workers = thread_budget();
  if (workers <= 1 || n_chunks == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const std::size_t b = c * chunk;
      if (b >= n) break;
      fn(c, b, std::min(n, b + chunk));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      const std::size_t b = c * chunk;
      if (b >= n) return;
      fn(c, b, std::min(n, b + chunk));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

/// |x|^p with cheap integer-exponent paths; the norms below call this in
/// O(N^{2d}) loops, so avoiding std::pow for the default p matters.
struct PowerP {
  explicit PowerP(double p) : p(p) {
    ip = static_cast<int>(std::lround(p));
    integral = (ip >= 1 && std::abs(p - ip) < 1e-12);
  }
  double operator()(double x) const {
    if (!integral) return std::pow(std::fabs(x), p);
    double a = std::fabs(x);
    double r = 1.0;
    double b = a;
    int e = ip;
    while (e > 0) {
      if (e & 1) r *= b;
      b *= b;
      e >>= 1;
    }
    return r;
  }
  double p;
  int ip = 0;
  bool integral = false;
};

/// splitmix64 mix; used to derive independent per-probe / per-member seeds so
/// seeded ensembles nest by construction.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace mrlab
