#pragma once

// Umbrella header.
#include "robsense/ces.hpp"
#include "robsense/commands.hpp"
#include "robsense/config.hpp"
#include "robsense/detectors.hpp"
#include "robsense/estimators.hpp"
#include "robsense/matrix.hpp"
#include "robsense/montecarlo.hpp"
#include "robsense/rng.hpp"
