#pragma once

#include <cstddef>
#include <functional>

namespace msent {

/// Runs body(i) for i in [0, count) on up to `workers` threads.
/// Indices are claimed dynamically; the first exception is rethrown.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace msent
