#pragma once

// Umbrella header for the net-load forecast comparison library.

#include "nlf/api.hpp"
#include "nlf/crps.hpp"
#include "nlf/error.hpp"
#include "nlf/forecast.hpp"
#include "nlf/io.hpp"
#include "nlf/pipeline.hpp"
#include "nlf/series.hpp"
#include "nlf/skill.hpp"
#include "nlf/store.hpp"
#include "nlf/synth.hpp"
#include "nlf/time.hpp"
