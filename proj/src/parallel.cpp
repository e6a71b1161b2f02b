#include "dkl/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dkl {

void parallel_for(int num_threads, int count, const std::function<void(int)>& fn) {
    if (count <= 0) {
        return;
    }
    const int workers = std::min(std::max(num_threads, 1), count);
    if (workers == 1) {
        for (int i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }

    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto run_block = [&](int begin, int end) {
        try {
            for (int i = begin; i < end; ++i) {
                fn(i);
            }
        } catch (...) {
            std::scoped_lock lock(error_mutex);
            if (!first_error) {
                first_error = std::current_exception();
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers);
    const int base = count / workers;
    const int extra = count % workers;
    int begin = 0;
    for (int w = 0; w < workers; ++w) {
        const int end = begin + base + (w < extra ? 1 : 0);
        threads.emplace_back(run_block, begin, end);
        begin = end;
    }
    for (auto& t : threads) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

}  // namespace dkl
