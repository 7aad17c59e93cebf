#pragma once

#include "dynmem/errors.hpp"
#include "dynmem/quadrature.hpp"
#include "dynmem/specfun.hpp"
#include "dynmem/signal.hpp"
#include "dynmem/kernels.hpp"
#include "dynmem/fracops.hpp"
#include "dynmem/responses.hpp"
#include "dynmem/discrete_map.hpp"
#include "dynmem/harrod_domar.hpp"
