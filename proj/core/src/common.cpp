#include "randbal/common.hpp"

#include <cstdio>
#include <cstdlib>

namespace randbal {

unsigned worker_count(std::size_t jobs) {
  if (jobs <= 1) return 1;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* cap = std::getenv("RANDBAL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(cap, &end, 10);
    if (end != cap && *end == '\0' && v >= 1 && v < 1'000'000) {
      hw = hw < static_cast<unsigned>(v) ? hw : static_cast<unsigned>(v);
    }
  }
  const std::size_t most = jobs < hw ? jobs : hw;
  return static_cast<unsigned>(most < 1 ? 1 : most);
}

std::string format_sig17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace randbal
