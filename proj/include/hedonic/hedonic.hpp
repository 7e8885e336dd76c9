#pragma once

#include "hedonic/error.hpp"
#include "hedonic/linalg.hpp"
#include "hedonic/core_model.hpp"
#include "hedonic/surplus.hpp"
#include "hedonic/reduction.hpp"
#include "hedonic/lp/transportation.hpp"
#include "hedonic/lp/revised_simplex.hpp"
#include "hedonic/solver.hpp"
#include "hedonic/diagnostics.hpp"
