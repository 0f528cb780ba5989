#include "pact/parallel.hpp"

#include <cstdlib>
#include <string>

namespace pact {

namespace {

std::size_t default_threads() {
  if (const char* env = std::getenv("PACT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::atomic<std::size_t> configured{0};

}  // namespace

void set_thread_count(std::size_t count) { configured = count; }

std::size_t thread_count() {
  const std::size_t c = configured;
  return c == 0 ? default_threads() : c;
}

}  // namespace pact
