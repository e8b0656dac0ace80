// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace gsc {

/// Worker count for data-parallel loops: GSC_THREADS if set (clamped to
/// [1,256]), otherwise hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [begin,end) on a static partition of contiguous
/// chunks, one per worker. Deterministic output requires that fn writes to
/// disjoint locations per index, which is how all callers here use it.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

}  // namespace gsc
