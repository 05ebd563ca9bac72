#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace stackcast {

/// Number of workers a `jobs` request resolves to (0 = all hardware threads).
int resolve_jobs(int jobs) noexcept;

/// Runs fn(i) for i in [0, n). jobs <= 1 is the serial reference path; the
/// OpenMP path must only write to per-index slots so that both paths produce
/// bit-identical results. The first exception thrown by any task is rethrown
/// on the calling thread.
template <typename Fn>
void parallel_for_index(std::size_t n, int jobs, Fn&& fn)
{
    const int workers = resolve_jobs(jobs);
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
#if defined(_OPENMP)
    std::exception_ptr first_error;
    std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
#else
    for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

} // namespace stackcast
