#pragma once

#include "ccfsense/error.hpp"
#include "ccfsense/units.hpp"
#include "ccfsense/model_core.hpp"
#include "ccfsense/mechanics.hpp"
#include "ccfsense/sensing.hpp"
#include "ccfsense/plan.hpp"
#include "ccfsense/config.hpp"
#include "ccfsense/experiment.hpp"
#include "ccfsense/analysis.hpp"
#include "ccfsense/reproduce.hpp"
#include "ccfsense/svg.hpp"
