#pragma once

// Fixed-partition parallel loops. Results never depend on the thread count:
// work items are keyed by index and reductions run in index order.

#include <cstddef>
#include <functional>
#include <vector>

namespace pam1d {

/// Worker count from PAM1D_THREADS, else the hardware concurrency.
unsigned worker_count();

/// Calls fn(i) for i in [0, n) on worker_count() threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Pairwise (cascade) summation in fixed order.
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

}  // namespace pam1d
