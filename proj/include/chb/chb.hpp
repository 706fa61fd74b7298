#pragma once

// Umbrella header for the chb library: a structured-grid finite element
// simulator for the coupled Cahn-Hilliard-Biot equations with a diagnostics
// harness for the sharp-interface coupling conditions.

#include "chb/assembly.hpp"
#include "chb/diagnostics.hpp"
#include "chb/driver.hpp"
#include "chb/errors.hpp"
#include "chb/grid.hpp"
#include "chb/io.hpp"
#include "chb/model.hpp"
#include "chb/scenario.hpp"
#include "chb/selftest.hpp"
#include "chb/solver.hpp"
#include "chb/system.hpp"
#include "chb/tensor.hpp"
