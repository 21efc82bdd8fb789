#pragma once

#include "constrained.hpp"
#include "errors.hpp"
#include "expanded.hpp"
#include "generators.hpp"
#include "graph.hpp"
#include "json_io.hpp"
#include "oracle.hpp"
#include "policy.hpp"
#include "rational.hpp"
#include "rng.hpp"
#include "simulator.hpp"
#include "validate.hpp"
