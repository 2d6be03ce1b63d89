#pragma once

#include "hhpim/config.hpp"
#include "hhpim/harness.hpp"
#include "hhpim/pim_model.hpp"
#include "hhpim/placement_dp.hpp"
#include "hhpim/report.hpp"
#include "hhpim/slice_sim.hpp"
#include "hhpim/workload_gen.hpp"
