#include "ergolab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace ergolab {

namespace {
std::atomic<int> g_override{0};
}

int worker_count() {
    const int o = g_override.load(std::memory_order_relaxed);
    if (o > 0) return o;
    if (const char* env = std::getenv("ERGOLAB_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void set_worker_count(int n) {
    g_override.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

}  // namespace ergolab
