#pragma once

#include "stratex/asymmetric.hpp"
#include "stratex/error.hpp"
#include "stratex/model.hpp"
#include "stratex/odekit.hpp"
#include "stratex/planner.hpp"
#include "stratex/sim.hpp"
#include "stratex/strategy.hpp"
#include "stratex/symmetric.hpp"
#include "stratex/verify.hpp"
