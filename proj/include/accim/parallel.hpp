#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace accim {

// Runs body(i) for i in [0, n) on up to `workers` threads using fixed contiguous chunks.
// Callers write results by index, so output never depends on the worker count.
template <class Body>
void parallel_for(std::size_t n, int workers, Body&& body)
{
    const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(workers > 0 ? workers : 1, n));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(w);
    const std::size_t chunk = (n + w - 1) / w;
    for (std::size_t t = 0; t < w; ++t) {
        threads.emplace_back([&, t] {
            try {
                const std::size_t end = std::min(n, (t + 1) * chunk);
                for (std::size_t i = t * chunk; i < end; ++i)
                    body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace accim
