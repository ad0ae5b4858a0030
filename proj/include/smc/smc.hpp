#pragma once

#include "smc/engine/moves.hpp"
#include "smc/engine/particles.hpp"
#include "smc/engine/sampler.hpp"
#include "smc/engine/temperature.hpp"
#include "smc/engine/trace.hpp"
#include "smc/errors.hpp"
#include "smc/kernels.hpp"
#include "smc/linalg.hpp"
#include "smc/models/binary.hpp"
#include "smc/models/gaussian.hpp"
#include "smc/models/laplace.hpp"
#include "smc/models/lgcp.hpp"
#include "smc/models/model.hpp"
#include "smc/models/toys.hpp"
#include "smc/rng.hpp"
#include "smc/tuning.hpp"
