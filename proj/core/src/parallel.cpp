#include "kolmo/parallel.hpp"

#include <cstdlib>
#include <string>

namespace kolmo {

unsigned worker_count() {
  if (const char* env = std::getenv("KOLMO_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace kolmo
