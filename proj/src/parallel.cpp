#include "pulseflow/parallel.hpp"

#include <cstdlib>
#include <string>

namespace pulseflow {

std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PULSEFLOW_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
    } catch (const std::exception&) {
      // Unparseable values leave the hardware default in place.
    }
  }
  return n;
}

}  // namespace pulseflow
