#pragma once

#include "smdim/adversaries.hpp"
#include "smdim/bounds.hpp"
#include "smdim/core.hpp"
#include "smdim/dimensions.hpp"
#include "smdim/game_solver.hpp"
#include "smdim/instances.hpp"
#include "smdim/learners.hpp"
#include "smdim/rational.hpp"
#include "smdim/simulation.hpp"
#include "smdim/verify.hpp"
