#pragma once

namespace evprice {

/// Selects the OpenMP kernel or its serial reference. Both paths use the same
/// work decomposition and RNG streams, so they return identical results.
enum class Execution { serial, parallel };

/// Thread count for parallel kernels; 0 keeps the OpenMP default.
void set_workers(int workers);
int max_workers();

}  // namespace evprice
