// Everything at once.
#pragma once

#include "common.hpp"
#include "distribution.hpp"
#include "ergodic.hpp"
#include "gbm.hpp"
#include "gsde.hpp"
#include "lattice.hpp"
#include "lln.hpp"
#include "models.hpp"
#include "presets.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "sequential.hpp"
#include "textformat.hpp"
