#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace randbal {

// Malformed or inconsistent user input: files, flags, study specs,
// out-of-range parameters. CLI maps this to exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid input on which the requested analysis cannot run:
// no analyzable blocks, a randomization space too large to enumerate,
// a degenerate denominator. CLI maps this to exit code 2.
struct DesignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Worker threads to use for `jobs` independent work items. Honors the
// RANDBAL_THREADS environment variable as an upper cap when set.
unsigned worker_count(std::size_t jobs);

// Runs fn(worker, begin, end) over contiguous chunks of [0, total).
// Chunk boundaries depend only on `total` and the resolved worker count.
// Callers must key any output by item index so results are identical for
// every worker count; fn must not throw.
template <class Fn>
void parallel_chunks(std::size_t total, Fn&& fn) {
  const unsigned workers = worker_count(total);
  if (workers <= 1) {
    fn(0u, std::size_t{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t base = total / workers;
  const std::size_t extra = total % workers;
  std::size_t begin = 0;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t len = base + (w < extra ? 1 : 0);
    pool.emplace_back([&fn, w, begin, len] { fn(w, begin, begin + len); });
    begin += len;
  }
  for (auto& t : pool) t.join();
}

// Formats v with 17 significant digits (printf %.17g), enough to
// round-trip any double, so repeated runs serialize identically.
std::string format_sig17(double v);

}  // namespace randbal
