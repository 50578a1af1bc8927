#pragma once

#include <cstddef>
#include <exception>

namespace mdq {

enum class Execution { serial, parallel };

/// Runs body(i) for i in [0, n). The parallel path uses OpenMP; the first
/// exception thrown by any iteration is rethrown on the calling thread.
template <class F>
void for_each_index(std::size_t n, Execution ex, F&& body) {
    if (ex == Execution::serial) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(mdq_for_each_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace mdq
