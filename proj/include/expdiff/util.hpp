#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace expdiff {

// Worker cap from EXPDIFF_THREADS (default: hardware concurrency).
unsigned worker_count();

// Runs fn(i) for i in [0, n) across workers. Each index must be independent;
// results keyed by index so the worker count cannot change outcomes.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// FNV-1a hash, hex-encoded; used for config provenance.
std::string fnv1a_hex(const std::string& text);

// Fixed-format floating point with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace expdiff
