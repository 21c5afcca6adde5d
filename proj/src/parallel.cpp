#include "covphase/parallel.hpp"

#include <omp.h>

namespace covphase {

int worker_threads() { return omp_get_max_threads(); }

}  // namespace covphase
