#pragma once

#include "liouville/expr.hpp"
#include "liouville/faa_di_bruno.hpp"
#include "liouville/fd_oracle.hpp"
#include "liouville/io.hpp"
#include "liouville/jet.hpp"
#include "liouville/ode.hpp"
#include "liouville/scaled_real.hpp"
#include "liouville/seminorm.hpp"
#include "liouville/solution_map.hpp"
