#pragma once

#include <cstddef>
#include <functional>

namespace plbif {

/// Worker count for every parallel loop in the library. 0 restores the
/// OpenMP default (logical cores).
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, n) on the worker pool. Each index writes only
/// its own output slot, so results never depend on scheduling. If bodies
/// throw, the exception from the lowest index is rethrown after the loop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise sum with a fixed association order (independent of threads).
double pairwise_sum(const double* values, std::size_t n);

}  // namespace plbif
