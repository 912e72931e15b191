#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <mutex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rmt {

using cplx = std::complex<double>;

/// Configuration or precondition violation (bad parameters, malformed input).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// MCMC step-size tuning failed (pathological acceptance rate).
struct TuningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Quadrature did not converge to the requested tolerance.
struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure (singular minor, branch-point proximity, decomposition failure).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic RNG.
//
// All randomness in the project flows through this generator so that results
// are byte-identical for a given seed across compilers and platforms.
// std::mt19937_64 has a fully specified output sequence; uniform and normal
// variates are derived from raw 64-bit draws by hand instead of through
// std::*_distribution, whose sequences are implementation-defined.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed, an index
/// (e.g. replication or chain number) and a fixed purpose tag.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::uint64_t tag = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(tag)) ^ index);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

  std::uint64_t next_u64() {
    // xorshift* stream; fixed algorithm, no library dependence.
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dULL;
  }

  /// Uniform on (0, 1); never returns 0 so logs are safe.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (two uniforms per pair, cached).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// ---------------------------------------------------------------------------
// Deterministic replication-level parallelism.
//
// Work item i writes only to slot i of its output; the schedule (which thread
// runs which item) therefore cannot affect the result. Aggregations downstream
// iterate slots in index order, fixing floating-point summation order.
// ---------------------------------------------------------------------------

inline void parallel_for(int count, int threads,
                         const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  int nthreads = std::min(threads, count);
  pool.reserve(static_cast<std::size_t>(nthreads));
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failed.load()) std::rethrow_exception(error);
}

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_full(double v);
std::string format_full(cplx v);

}  // namespace rmt
