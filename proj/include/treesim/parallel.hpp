#pragma once

#include <cstddef>
#include <functional>

namespace treesim {

// worker pool size used by parallel_for; 0 restores the hardware default
void set_worker_threads(int n);
int worker_threads();

// runs fn(0..n-1); each index writes only its own slot, so results are
// deterministic regardless of scheduling
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace treesim
