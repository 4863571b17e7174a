#ifndef LIPBESOV_PARALLEL_HPP_
#define LIPBESOV_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace lipbesov {

// Worker cap used by parallel_for. Results never depend on it: every
// parallel loop writes disjoint outputs and reductions happen afterwards in
// index order. threads <= 0 means hardware concurrency.
void set_thread_count(int threads);
int thread_count();

// Runs body(i) for i in [0, n), split into contiguous chunks.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lipbesov

#endif  // LIPBESOV_PARALLEL_HPP_
