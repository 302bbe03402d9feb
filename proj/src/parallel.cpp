#include "advc/parallel.hpp"

#include <cstdlib>
#include <string>

namespace advc {

int worker_count() {
  if (const char* env = std::getenv("ADVC_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
      // Fall through to the hardware default.
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace advc
