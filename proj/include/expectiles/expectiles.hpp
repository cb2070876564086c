#pragma once

// Umbrella header: disappointment-averse evaluation of risky acts via
// expectiles. Four cross-checking solvers, the worst-case-scenario dual,
// an executable axiom laboratory and agent-level preference tools.

#include "expectiles/axioms.hpp"
#include "expectiles/core.hpp"
#include "expectiles/dual.hpp"
#include "expectiles/io.hpp"
#include "expectiles/preferences.hpp"
#include "expectiles/random.hpp"
#include "expectiles/solvers.hpp"
