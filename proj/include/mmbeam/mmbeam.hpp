#pragma once

#include "mmbeam/codebook.hpp"
#include "mmbeam/config.hpp"
#include "mmbeam/ddqn.hpp"
#include "mmbeam/error.hpp"
#include "mmbeam/measurement.hpp"
#include "mmbeam/metrics.hpp"
#include "mmbeam/policy.hpp"
#include "mmbeam/scheduler.hpp"
#include "mmbeam/simulation.hpp"
#include "mmbeam/topology.hpp"
#include "mmbeam/traffic.hpp"
