#pragma once

#include "sedm/data.hpp"
#include "sedm/errors.hpp"
#include "sedm/fit.hpp"
#include "sedm/gpd.hpp"
#include "sedm/likelihood.hpp"
#include "sedm/model.hpp"
#include "sedm/optimize.hpp"
#include "sedm/quadrature.hpp"
#include "sedm/random.hpp"
#include "sedm/simulation.hpp"
#include "sedm/special_functions.hpp"
