#pragma once

#include <cstddef>
#include <functional>

namespace geosstv {

/// Worker count used by operator kernels. 0 and 1 both mean serial.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs fn(k) for k in [0, count). Each k must write a disjoint output range.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

} // namespace geosstv
