#include "ctedge/parallel.hpp"

#include <atomic>

namespace ctedge {

namespace {

std::atomic<int>& max_threads_slot() {
    static std::atomic<int> value{0};
    return value;
}

} // namespace

void set_max_threads(int n) { max_threads_slot().store(n > 0 ? n : 0); }

int max_threads() {
    int v = max_threads_slot().load();
    if (v > 0) return v;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

} // namespace ctedge
