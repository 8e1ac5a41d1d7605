#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace silt {

/// Worker count used by parallel_for. Initialized from SILT_THREADS
/// (falls back to 1); overridable at runtime. Never affects results.
unsigned thread_count();
void set_thread_count(unsigned n);

/// Runs body(i) for i in [0, n) over thread_count() workers. Each index is
/// processed exactly once; bodies must write only to index-owned storage.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Neumaier-compensated sum over a fixed balanced binary tree (leaves of 16).
/// The association order depends only on values.size().
double tree_sum(std::span<const double> values);

}  // namespace silt
