#pragma once

#include <cstddef>
#include <functional>

namespace bsdwear {

/// Number of worker threads to use when the caller does not care.
int default_jobs();

/// Runs fn(0..count-1) across up to `jobs` threads. Order of execution is
/// unspecified; the work items must be independent. The first exception
/// thrown by any item is rethrown after all workers finish.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace bsdwear
