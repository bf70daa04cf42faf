#include "kgibbs/parallel.hpp"

namespace kgibbs {

namespace {

std::atomic<int> g_default_workers{0};

}  // namespace

int default_workers() {
  const int w = g_default_workers.load();
  if (w > 0) return w;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void set_default_workers(int workers) { g_default_workers = std::max(0, workers); }

}  // namespace kgibbs
