// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lamp::harness {

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& body) {
    const std::size_t workers = std::min(n, std::max<std::size_t>(threads, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace lamp::harness
