#include "emgauth/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace emgauth {
namespace {

std::atomic<unsigned> g_requested_threads{0};

} // namespace

void set_thread_count(unsigned count) { g_requested_threads.store(count); }

unsigned thread_count() {
    const unsigned requested = g_requested_threads.load();
    if (requested > 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    if (n == 0) {
        return;
    }
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    std::vector<std::exception_ptr> errors(n);

    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        {
            std::vector<std::jthread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (;;) {
                        const std::size_t i = next.fetch_add(1);
                        if (i >= n || failed.load()) {
                            return;
                        }
                        try {
                            body(i);
                        } catch (...) {
                            errors[i] = std::current_exception();
                            failed.store(true);
                        }
                    }
                });
            }
        }
    }

    for (auto& error : errors) {
        if (error) {
            std::rethrow_exception(error);
        }
    }
}

} // namespace emgauth
