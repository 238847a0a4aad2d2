#pragma once

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace circadian::detail {

/// Runs body(i) for i in [0, n) on up to `threads` OpenMP threads (0 = runtime
/// default). The first exception thrown by any iteration is rethrown after the loop.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body)
{
    std::exception_ptr error;
#ifdef _OPENMP
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
#endif
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(circadian_parallel_for_error)
            if (!error)
                error = std::current_exception();
        }
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace circadian::detail
