#pragma once

#include <functional>

namespace cs {

// Worker count resolved from CODEDSTEREO_THREADS: unset or 0 means all
// hardware cores, otherwise the value is the cap.
int thread_count();

// Runs fn(i) for i in [begin, end). Iterations are split into contiguous
// chunks, one per worker. Falls back to a serial loop when only one worker
// is available or when called from inside another parallel_for.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

}  // namespace cs
