#pragma once

namespace rawbfst {

/// Worker count for cube- and replicate-level loops: RAWBFST_THREADS when set
/// to a positive integer, otherwise the OpenMP default.
int worker_threads();

}  // namespace rawbfst
