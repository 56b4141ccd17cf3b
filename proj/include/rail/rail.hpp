#pragma once

#include "rail/error.hpp"
#include "rail/time.hpp"
#include "rail/rng.hpp"
#include "rail/format.hpp"
#include "rail/pathsim.hpp"
#include "rail/railedge.hpp"
#include "rail/engine.hpp"
#include "rail/metrics.hpp"
#include "rail/quality.hpp"
#include "rail/scenario_io.hpp"
#include "rail/report.hpp"
#include "rail/suite.hpp"
