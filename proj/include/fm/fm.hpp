#pragma once

// Umbrella header for the fm toolkit.

#include "fm/core.hpp"
#include "fm/dsl.hpp"
#include "fm/event_algebra.hpp"
#include "fm/render.hpp"
#include "fm/simulate.hpp"
#include "fm/validate.hpp"
