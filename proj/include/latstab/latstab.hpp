#pragma once

// latstab: simulation and frequency-domain analysis of lateral string
// stability for vehicle platoons on arc-length-parameterized paths.

#include "analysis.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "control.hpp"
#include "design.hpp"
#include "freq.hpp"
#include "io.hpp"
#include "linalg.hpp"
#include "path.hpp"
#include "poly.hpp"
#include "simulate.hpp"
#include "tf.hpp"
#include "vehicle.hpp"
