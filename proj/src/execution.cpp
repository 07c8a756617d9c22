#include "evprice/execution.hpp"

#include <omp.h>

namespace evprice {

void set_workers(int workers) {
  if (workers > 0) omp_set_num_threads(workers);
}

int max_workers() { return omp_get_max_threads(); }

}  // namespace evprice
