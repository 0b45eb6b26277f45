#pragma once

// Umbrella header for the numerical library (no I/O dependencies).
// The JSON/CSV layer lives in io.hpp and the command-line driver in cli.hpp.

#include "gamma_elastica/convergence.hpp"
#include "gamma_elastica/energy.hpp"
#include "gamma_elastica/envelope.hpp"
#include "gamma_elastica/errors.hpp"
#include "gamma_elastica/functional.hpp"
#include "gamma_elastica/lbfgs.hpp"
#include "gamma_elastica/limit.hpp"
#include "gamma_elastica/matrix.hpp"
#include "gamma_elastica/mesh.hpp"
#include "gamma_elastica/parallel.hpp"
#include "gamma_elastica/random.hpp"
#include "gamma_elastica/solver.hpp"
#include "gamma_elastica/spectral.hpp"
#include "gamma_elastica/sphere.hpp"
#include "gamma_elastica/wells.hpp"
