#include "hsad/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace hsad {

namespace {
std::atomic<int> g_threads{0};

int effective_threads() {
    int t = g_threads.load();
    if (t <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        t = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return t;
}
} // namespace

void set_thread_count(int threads) { g_threads = threads; }

int thread_count() { return effective_threads(); }

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn) {
    if (n == 0) return;
    size_t nthreads = static_cast<size_t>(effective_threads());
    nthreads = std::min(nthreads, n);
    if (nthreads <= 1) {
        fn(0, n);
        return;
    }
    size_t chunk = (n + nthreads - 1) / nthreads;
    std::vector<std::thread> workers;
    workers.reserve(nthreads);
    std::vector<std::exception_ptr> errors(nthreads);
    for (size_t t = 0; t < nthreads; ++t) {
        size_t begin = t * chunk;
        if (begin >= n) break;
        size_t end = std::min(n, begin + chunk);
        workers.emplace_back([&fn, &errors, t, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace hsad
