#include "pspin/parallel.hpp"

#include <cstdlib>
#include <string>

#include "pspin/errors.hpp"

namespace pspin {

int worker_count() {
  if (const char* env = std::getenv("PSPIN_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 1024) {
      throw UsageError("PSPIN_THREADS must be a positive integer, got '" + std::string(env) + "'");
    }
    return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace pspin
