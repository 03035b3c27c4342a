#include "z2lab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace z2lab {

int default_threads() {
  if (const char* env = std::getenv("Z2LAB_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

}  // namespace z2lab
