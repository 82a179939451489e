#pragma once

#include "aware_ground/error.hpp"
#include "aware_ground/geometry.hpp"
#include "aware_ground/config_text.hpp"
#include "aware_ground/ground_model.hpp"
#include "aware_ground/positioning.hpp"
#include "aware_ground/match_sim.hpp"
#include "aware_ground/least_squares.hpp"
#include "aware_ground/decision_engine.hpp"
#include "aware_ground/analytics.hpp"
#include "aware_ground/pipeline_store.hpp"
#include "aware_ground/cli.hpp"
