#include "dse/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace dse {
namespace {

std::atomic<std::size_t> g_override{0};

}  // namespace

std::size_t thread_count()
{
    if (auto n = g_override.load(); n > 0)
        return n;
    std::size_t n = 0;
    if (const char* env = std::getenv("DSE_THREADS")) {
        try {
            n = static_cast<std::size_t>(std::stoul(env));
        } catch (const std::exception&) {
            n = 0;
        }
    }
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

void set_thread_count(std::size_t n)
{
    g_override.store(n);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body)
{
    std::size_t workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w)
        pool.emplace_back(work);
    work();
    pool.clear();
    if (error)
        std::rethrow_exception(error);
}

}  // namespace dse
