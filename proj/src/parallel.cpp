#include "cbr/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace cbr {

namespace {
std::atomic<std::size_t> g_override{0};
}

std::size_t default_workers() {
  if (const auto n = g_override.load(); n > 0) return n;
  if (const char* env = std::getenv("CBR_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_workers(std::size_t workers) { g_override.store(workers); }

}  // namespace cbr
