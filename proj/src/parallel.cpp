#include "stackcast/parallel.hpp"

#if defined(_OPENMP)
#include <omp.h>
#else
#include <thread>
#endif

namespace stackcast {

int resolve_jobs(int jobs) noexcept
{
    if (jobs > 0) return jobs;
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
#endif
}

} // namespace stackcast
