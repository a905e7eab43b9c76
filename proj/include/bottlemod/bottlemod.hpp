#pragma once

#include "bottlemod/tolerance.hpp"
#include "bottlemod/polynomial.hpp"
#include "bottlemod/piecewise.hpp"
#include "bottlemod/model.hpp"
#include "bottlemod/solver.hpp"
#include "bottlemod/metrics.hpp"
#include "bottlemod/workflow.hpp"
#include "bottlemod/oracle.hpp"
#include "bottlemod/io.hpp"
#include "bottlemod/report.hpp"
