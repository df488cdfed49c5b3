#pragma once

#include <mutex>

namespace rbpimd::detail {

// FFTW's planner is not reentrant; plans are created under this lock and only
// executed (thread-safe) afterwards with the new-array interface.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace rbpimd::detail
