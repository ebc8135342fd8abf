#pragma once

// Umbrella header for the library. The command-line layer (cli.hpp) is not
// included, so CLI11 stays out of library users' builds.

#include "monoweight/constants.hpp"
#include "monoweight/errors.hpp"
#include "monoweight/gauss.hpp"
#include "monoweight/inequalities.hpp"
#include "monoweight/isoperimetry.hpp"
#include "monoweight/monte_carlo.hpp"
#include "monoweight/neumann.hpp"
#include "monoweight/parallel.hpp"
#include "monoweight/radial.hpp"
#include "monoweight/rearrangement.hpp"
#include "monoweight/report.hpp"
#include "monoweight/rule.hpp"
#include "monoweight/shape.hpp"
#include "monoweight/surface.hpp"
#include "monoweight/test_function.hpp"
#include "monoweight/weight.hpp"
