#pragma once

#include "entrocone/catalog.hpp"
#include "entrocone/cone.hpp"
#include "entrocone/constraint.hpp"
#include "entrocone/dag.hpp"
#include "entrocone/dist.hpp"
#include "entrocone/expr.hpp"
#include "entrocone/io.hpp"
#include "entrocone/lp.hpp"
#include "entrocone/project.hpp"
#include "entrocone/random.hpp"
#include "entrocone/stats.hpp"
#include "entrocone/subset.hpp"
#include "entrocone/symmetry.hpp"
#include "entrocone/version.hpp"
#include "entrocone/witness.hpp"
