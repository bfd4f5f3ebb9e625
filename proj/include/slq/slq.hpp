#pragma once

#include "slq/analysis.hpp"
#include "slq/config.hpp"
#include "slq/csv.hpp"
#include "slq/errors.hpp"
#include "slq/experiment.hpp"
#include "slq/metrics.hpp"
#include "slq/model.hpp"
#include "slq/policy.hpp"
#include "slq/stochastic.hpp"
