#pragma once

#include "mosegman/geometry.hpp"
#include "mosegman/scene.hpp"
#include "mosegman/grid.hpp"
#include "mosegman/rrt.hpp"
#include "mosegman/motion.hpp"
#include "mosegman/sequencer.hpp"
#include "mosegman/sgfs.hpp"
#include "mosegman/planner.hpp"
#include "mosegman/io.hpp"
#include "mosegman/bench.hpp"
